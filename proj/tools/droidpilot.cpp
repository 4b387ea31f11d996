// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/loop.hpp>
#include <droidpilot/agent/trace_io.hpp>
#include <droidpilot/device/webdriver.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/eval/distill.hpp>
#include <droidpilot/eval/lint.hpp>
#include <droidpilot/eval/oracle.hpp>
#include <droidpilot/eval/suite.hpp>
#include <droidpilot/llm/recorder.hpp>
#include <droidpilot/screen/refine.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace droidpilot;

namespace
{

enum ExitCode
{
    ExitOk = 0,
    ExitInput = 1,
    ExitUnfinished = 2,
    ExitBackend = 3,
};

// Raised for bad inputs; main() maps it to ExitInput.
struct InputError: std::runtime_error
{
    using std::runtime_error::runtime_error;
};

auto env_or(char const* name, std::string fallback) -> std::string
{
    if (auto const* value = std::getenv(name); value && *value)
        return value;
    return fallback;
}

auto read_file(std::string const& path) -> std::string
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read " + path);
    auto buf = std::ostringstream {};
    buf << in.rdbuf();
    return buf.str();
}

auto read_json(std::string const& path) -> json
{
    auto doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded())
        throw InputError(path + " is not valid JSON");
    return doc;
}

void write_file(fs::path const& path, std::string const& content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content))
        throw InputError("cannot write " + path.string());
}

// Config file merged with environment overrides. Secrets come from the environment only.
struct CliConfig
{
    std::string config_path;
    std::string llm_endpoint;
    std::string llm_api_key;
    std::string webdriver_url;
    std::string output_dir = "droidpilot-out";
    std::string log_level = "warn";
    json agent = json::object();
    json capabilities = json::object();

    void load()
    {
        if (!config_path.empty())
        {
            auto const doc = read_json(config_path);
            if (!doc.is_object())
                throw InputError("config must be a JSON object");
            if (doc.contains("llm_api_key"))
                spdlog::warn("ignoring llm_api_key in {}; set DROIDPILOT_LLM_API_KEY instead", config_path);
            llm_endpoint = doc.value("llm_endpoint", llm_endpoint);
            webdriver_url = doc.value("webdriver_url", webdriver_url);
            output_dir = doc.value("output_dir", output_dir);
            log_level = doc.value("log_level", log_level);
            agent = doc.value("agent", agent);
            capabilities = doc.value("capabilities", capabilities);
        }
        llm_endpoint = env_or("DROIDPILOT_LLM_ENDPOINT", llm_endpoint);
        llm_api_key = env_or("DROIDPILOT_LLM_API_KEY", {});
        webdriver_url = env_or("DROIDPILOT_WEBDRIVER_URL", webdriver_url);
        output_dir = env_or("DROIDPILOT_OUTPUT_DIR", output_dir);
    }
};

auto verdicts_path(std::string const& dir) -> fs::path
{
    return fs::path(dir) / "verdicts.json";
}

auto load_verdicts(fs::path const& path) -> eval::VerdictMap
{
    auto out = eval::VerdictMap {};
    if (!fs::exists(path))
        return out;
    auto const doc = read_json(path.string());
    if (!doc.is_object())
        throw InputError(path.string() + ": verdicts must map trace ids to booleans");
    for (auto const& [id, value]: doc.items())
    {
        if (!value.is_boolean())
            throw InputError(path.string() + ": verdict for '" + id + "' is not a boolean");
        out[id] = value.get<bool>();
    }
    return out;
}

void save_verdicts(fs::path const& path, eval::VerdictMap const& verdicts)
{
    auto doc = ordered_json::object();
    for (auto const& [id, value]: verdicts)
        doc[id] = value;
    write_file(path, doc.dump(2) + "\n");
}

auto oracle_to_json(eval::TraceOracle const& oracle) -> ordered_json
{
    auto doc = ordered_json::object();
    doc["erroneous"] = oracle.erroneous;
    doc["shortest_length"] = oracle.shortest_length ? ordered_json(*oracle.shortest_length) : ordered_json(nullptr);
    return doc;
}

auto load_oracles(fs::path const& path) -> eval::OracleMap
{
    auto out = eval::OracleMap {};
    if (!fs::exists(path))
        return out;
    auto const doc = read_json(path.string());
    try
    {
        for (auto const& [id, value]: doc.items())
        {
            auto oracle = eval::TraceOracle {};
            oracle.erroneous = value.at("erroneous").get<std::vector<bool>>();
            if (value.contains("shortest_length") && !value["shortest_length"].is_null())
                oracle.shortest_length = value["shortest_length"].get<int>();
            out[id] = std::move(oracle);
        }
    }
    catch (json::exception const& e)
    {
        throw InputError(path.string() + ": " + e.what());
    }
    return out;
}

auto trace_file_name(std::string const& id) -> std::string
{
    return "trace-" + id + ".jsonl";
}

// Trace files named on the command line, or every trace-*.jsonl under the output dir.
auto load_traces(std::vector<std::string> const& files, std::string const& dir) -> std::vector<agent::ExecutionTrace>
{
    auto paths = std::vector<std::string>(files);
    if (paths.empty())
    {
        if (!fs::is_directory(dir))
            throw InputError("no traces given and " + dir + " is not a directory");
        for (auto const& entry: fs::directory_iterator(dir))
        {
            auto const name = entry.path().filename().string();
            if (name.rfind("trace-", 0) == 0 && entry.path().extension() == ".jsonl")
                paths.push_back(entry.path().string());
        }
        std::sort(paths.begin(), paths.end());
    }
    auto traces = std::vector<agent::ExecutionTrace> {};
    for (auto const& path: paths)
        traces.push_back(agent::load_trace(path));
    return traces;
}

auto report_text(eval::SuiteReport const& report) -> std::string
{
    return eval::render_table(report) + "\n" + eval::render_histogram(report);
}

void write_report(std::string const& dir, eval::SuiteReport const& report)
{
    write_file(fs::path(dir) / "report.json", eval::to_json(report).dump(2) + "\n");
    write_file(fs::path(dir) / "report.txt", report_text(report));
}

// {{{ refine

auto cmd_refine(std::string const& path, bool asJson) -> int
{
    auto const raw = screen::RawScreen { read_file(path), 0, "file" };
    auto const refined = screen::refine_raw(raw);
    if (!asJson)
    {
        std::cout << screen::render(refined);
        return ExitOk;
    }
    auto elements = ordered_json::array();
    for (auto const& e: refined.elements)
    {
        auto item = ordered_json::object();
        item["id"] = e.id;
        item["kind"] = screen::to_string(e.kind);
        item["label"] = e.label;
        item["input_capable"] = e.input_capable;
        item["enabled"] = e.enabled;
        if (e.checked)
            item["checked"] = *e.checked;
        item["path"] = e.source_path;
        elements.push_back(std::move(item));
    }
    auto doc = ordered_json::object();
    doc["screen_hash"] = refined.screen_hash;
    doc["elements"] = std::move(elements);
    doc["context"] = refined.context_lines;
    std::cout << doc.dump(2) << '\n';
    return ExitOk;
}

// }}}

// {{{ run

struct RunOptions
{
    std::string test_path;
    std::string backend = "sim";
    std::string llm;
    int max_steps = 0;
    bool record = false;
};

auto make_llm(std::string const& spec, CliConfig const& cfg, agent::TestCase const& test, std::string const& baseDir)
    -> std::unique_ptr<llm::LlmBackend>
{
    if (spec.rfind("replay:", 0) == 0)
        return std::make_unique<llm::ReplayBackend>(llm::ReplayScript::load(spec.substr(7)));
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
        return std::make_unique<llm::HttpLlmBackend>(llm::HttpBackendConfig { spec, cfg.llm_api_key });
    if (spec == "http")
    {
        if (cfg.llm_endpoint.empty())
            throw InputError("--llm http needs DROIDPILOT_LLM_ENDPOINT or llm_endpoint in the config");
        return std::make_unique<llm::HttpLlmBackend>(llm::HttpBackendConfig { cfg.llm_endpoint, cfg.llm_api_key });
    }
    if (spec.empty() && !test.replay_script.empty())
        return std::make_unique<llm::ReplayBackend>(
            llm::ReplayScript::load(eval::resolve_path(baseDir, test.replay_script)));
    throw InputError("--llm must be replay:PATH, http, or an http:// URL");
}

auto cmd_run(RunOptions const& opts, CliConfig const& cfg) -> int
{
    auto const baseDir = fs::path(opts.test_path).parent_path().string();
    auto const test = agent::test_case_from_json(read_json(opts.test_path));

    auto agentCfg = eval::agent_config_from_json(cfg.agent);
    if (opts.max_steps > 0)
        agentCfg.max_steps = opts.max_steps;
    if (opts.record)
        agentCfg.record_for_distillation = true;

    auto model = make_llm(opts.llm, cfg, test, baseDir);
    fs::create_directories(cfg.output_dir);
    auto sink = std::unique_ptr<llm::JsonlFileSink> {};
    if (opts.record)
        sink = std::make_unique<llm::JsonlFileSink>(
            (fs::path(cfg.output_dir) / ("exchanges-" + test.trace_id() + ".jsonl")).string());

    auto trace = agent::ExecutionTrace {};
    auto goalLine = std::string {};
    if (opts.backend == "sim")
    {
        auto const appSpec = sim::load_spec_file(eval::resolve_path(baseDir, test.app_binding));
        auto device = sim::SimDevice(appSpec);
        trace = agent::run_test_case(test, device, *model, agentCfg, sink.get());
        if (test.goal)
            goalLine = sim::check_goal(device.state(), *test.goal) ? "; goal reached" : "; goal NOT reached";
    }
    else if (opts.backend == "webdriver")
    {
        if (cfg.webdriver_url.empty())
            throw InputError("webdriver backend needs DROIDPILOT_WEBDRIVER_URL or webdriver_url in the config");
        auto caps = cfg.capabilities;
        if (!test.app_binding.empty() && !caps.contains("appium:appPackage"))
            caps["appium:appPackage"] = test.app_binding;
        try
        {
            auto device = device::WebDriverSession::open(cfg.webdriver_url, caps);
            trace = agent::run_test_case(test, *device, *model, agentCfg, sink.get());
        }
        catch (Error const& e)
        {
            std::cerr << "device session: " << e.what() << '\n';
            return ExitBackend;
        }
    }
    else
        throw InputError("--backend must be sim or webdriver");

    auto const tracePath = fs::path(cfg.output_dir) / trace_file_name(trace.trace_id);
    agent::save_trace(tracePath.string(), trace);
    std::cout << trace.trace_id << ": " << agent::to_string(trace.verdict.kind) << " after " << trace.executed_steps()
              << " step(s)" << goalLine;
    if (!trace.verdict.reason.empty())
        std::cout << " (" << trace.verdict.reason << ")";
    std::cout << "\ntrace: " << tracePath.string() << '\n';

    switch (trace.verdict.kind)
    {
        case agent::VerdictKind::Completed: return ExitOk;
        case agent::VerdictKind::BackendFailure: return ExitBackend;
        default: return ExitUnfinished;
    }
}

// }}}

auto cmd_suite(std::string const& path, int parallelism, CliConfig const& cfg) -> int
{
    auto spec = eval::load_suite(path);
    if (parallelism > 0)
        spec.parallelism = parallelism;
    if (!cfg.agent.empty())
        spec.agent = eval::agent_config_from_json(cfg.agent, spec.agent);

    auto const dir = fs::path(cfg.output_dir);
    auto human = load_verdicts(verdicts_path(cfg.output_dir));
    auto const run = eval::run_suite(spec, human);

    fs::create_directories(dir);
    for (auto const& trace: run.traces)
        agent::save_trace((dir / trace_file_name(trace.trace_id)).string(), trace);
    for (auto const& [id, value]: run.verdicts)
        human[id] = value;
    save_verdicts(verdicts_path(cfg.output_dir), human);
    auto oracles = ordered_json::object();
    for (auto const& [id, oracle]: run.oracles)
        oracles[id] = oracle_to_json(oracle);
    write_file(dir / "oracles.json", oracles.dump(2) + "\n");
    write_report(cfg.output_dir, run.report);

    for (auto const& row: run.report.per_test)
        std::cout << row.trace_id << ": " << eval::to_string(row.outcome) << " (" << agent::to_string(row.verdict.kind)
                  << ", " << row.steps << " step(s))\n";
    std::cout << '\n' << eval::render_table(run.report);
    return ExitOk;
}

struct VerdictOptions
{
    std::string file;
    std::string trace_id;
    bool pass = false;
    bool fail = false;
    bool interactive = false;
};

auto cmd_verdict(VerdictOptions const& opts, CliConfig const& cfg) -> int
{
    auto const path = verdicts_path(cfg.output_dir);
    auto verdicts = load_verdicts(path);
    auto changed = 0;

    if (!opts.file.empty())
        for (auto const& [id, value]: load_verdicts(opts.file))
        {
            verdicts[id] = value;
            ++changed;
        }

    if (!opts.trace_id.empty())
    {
        if (opts.pass == opts.fail)
            throw InputError("give exactly one of --pass or --fail with --trace-id");
        verdicts[opts.trace_id] = opts.pass;
        ++changed;
    }

    if (opts.interactive)
    {
        for (auto const& trace: load_traces({}, cfg.output_dir))
        {
            if (trace.verdict.kind != agent::VerdictKind::Completed || verdicts.count(trace.trace_id))
                continue;
            std::cout << trace.trace_id << ": " << trace.test.description << '\n';
            for (auto const& record: trace.records)
                std::cout << "  " << agent::history_line(record) << '\n';
            std::cout << "Did the test achieve its goal? [y/n/s(kip)] " << std::flush;
            auto answer = std::string {};
            if (!std::getline(std::cin, answer))
                break;
            if (answer == "y" || answer == "Y")
                verdicts[trace.trace_id] = true;
            else if (answer == "n" || answer == "N")
                verdicts[trace.trace_id] = false;
            else
                continue;
            ++changed;
        }
    }

    if (opts.file.empty() && opts.trace_id.empty() && !opts.interactive)
        throw InputError("nothing to record: use --file, --trace-id or --interactive");

    save_verdicts(path, verdicts);
    std::cout << "recorded " << changed << " verdict(s) in " << path.string() << '\n';
    return ExitOk;
}

auto cmd_lint(std::vector<std::string> const& descriptions, std::string const& file) -> int
{
    auto items = std::vector<std::pair<std::string, std::string>> {};
    for (auto const& d: descriptions)
        items.emplace_back("", d);
    if (!file.empty())
    {
        auto const doc = read_json(file);
        auto const tests = doc.is_object() && doc.contains("tests") ? doc["tests"] : json::array({ doc });
        for (auto const& t: tests)
        {
            auto const test = agent::test_case_from_json(t);
            items.emplace_back(test.trace_id(), test.description);
        }
    }
    if (items.empty())
        throw InputError("nothing to lint");

    for (auto const& [id, description]: items)
    {
        auto const findings = eval::lint_description(description);
        auto const name = id.empty() ? "\"" + description + "\"" : id;
        if (findings.empty())
            std::cout << name << ": no findings\n";
        for (auto const& f: findings)
            std::cout << name << ": " << eval::to_string(f.rule) << ": " << f.message << "\n    hint: " << f.hint
                      << '\n';
    }
    return ExitOk;
}

auto cmd_export(std::vector<std::string> const& files, std::string const& out, double factor, CliConfig const& cfg)
    -> int
{
    auto const traces = load_traces(files, cfg.output_dir);
    auto const oracles = load_oracles(fs::path(cfg.output_dir) / "oracles.json");
    auto const records = eval::export_distill(traces, oracles, { factor });
    auto const target = out.empty() ? fs::path(cfg.output_dir) / "distill.jsonl" : fs::path(out);
    auto buf = std::ostringstream {};
    eval::write_distill_jsonl(buf, records);
    write_file(target, buf.str());
    std::cout << "wrote " << records.size() << " record(s) to " << target.string() << '\n';
    return ExitOk;
}

auto cmd_report(std::vector<std::string> const& files, std::string const& technique, CliConfig const& cfg) -> int
{
    auto const traces = load_traces(files, cfg.output_dir);
    if (traces.empty())
        throw InputError("no traces found");
    auto const verdicts = load_verdicts(verdicts_path(cfg.output_dir));
    auto const oracles = load_oracles(fs::path(cfg.output_dir) / "oracles.json");
    auto report = eval::compute_metrics(traces, verdicts, oracles);
    if (!technique.empty())
        report.technique = technique;
    write_report(cfg.output_dir, report);
    std::cout << report_text(report);
    return report.pending > 0 ? ExitUnfinished : ExitOk;
}

} // namespace

auto main(int argc, char** argv) -> int
{
    spdlog::set_default_logger(spdlog::stderr_color_mt("droidpilot"));

    auto app = CLI::App { "Natural-language test execution for Android apps" };
    app.require_subcommand(1);
    auto cfg = CliConfig {};
    app.add_option("--config", cfg.config_path, "JSON configuration file");
    app.add_option("--output-dir", cfg.output_dir, "Directory for traces and reports");
    auto logLevel = std::string {};
    app.add_option("--log-level", logLevel, "trace, debug, info, warn, error or off");

    auto* refine = app.add_subcommand("refine", "Print the refined form of a UI hierarchy dump");
    auto xmlPath = std::string {};
    auto asJson = false;
    refine->add_option("xml", xmlPath)->required();
    refine->add_flag("--json", asJson, "Structured element list");

    auto* run = app.add_subcommand("run", "Execute one test case");
    auto runOpts = RunOptions {};
    run->add_option("test", runOpts.test_path, "Test-case JSON file")->required();
    run->add_option("--backend", runOpts.backend, "sim or webdriver");
    run->add_option("--llm", runOpts.llm, "replay:PATH, http, or an endpoint URL");
    run->add_option("--max-steps", runOpts.max_steps);
    run->add_flag("--record", runOpts.record, "Keep prompts and responses for distillation");

    auto* suite = app.add_subcommand("suite", "Execute a suite and write its report");
    auto suitePath = std::string {};
    auto parallelism = 0;
    suite->add_option("suite", suitePath)->required();
    suite->add_option("--parallelism", parallelism);

    auto* verdict = app.add_subcommand("verdict", "Record human verdicts");
    auto verdictOpts = VerdictOptions {};
    verdict->add_option("--file", verdictOpts.file, "JSON object of trace id to boolean");
    verdict->add_option("--trace-id", verdictOpts.trace_id);
    verdict->add_flag("--pass", verdictOpts.pass);
    verdict->add_flag("--fail", verdictOpts.fail);
    verdict->add_flag("--interactive", verdictOpts.interactive, "Ask for each completed trace without a verdict");

    auto* lint = app.add_subcommand("lint", "Check test descriptions");
    auto descriptions = std::vector<std::string> {};
    auto lintFile = std::string {};
    lint->add_option("description", descriptions);
    lint->add_option("--file", lintFile, "Test-case or suite JSON");

    auto* exportCmd = app.add_subcommand("export", "Write the distillation dataset");
    auto exportFiles = std::vector<std::string> {};
    auto exportOut = std::string {};
    auto factor = 2.0;
    exportCmd->add_option("traces", exportFiles);
    exportCmd->add_option("--out", exportOut);
    exportCmd->add_option("--factor", factor, "Drop traces longer than factor times the oracle length");

    auto* report = app.add_subcommand("report", "Render metrics over traces");
    auto reportFiles = std::vector<std::string> {};
    auto technique = std::string {};
    report->add_option("traces", reportFiles);
    report->add_option("--technique", technique);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        auto const code = app.exit(e);
        return code == 0 ? ExitOk : ExitInput;
    }

    try
    {
        auto const explicitOutput = cfg.output_dir;
        cfg.load();
        if (app.count("--output-dir"))
            cfg.output_dir = explicitOutput;
        if (!logLevel.empty())
            cfg.log_level = logLevel;
        spdlog::set_level(spdlog::level::from_str(cfg.log_level));

        if (*refine)
            return cmd_refine(xmlPath, asJson);
        if (*run)
            return cmd_run(runOpts, cfg);
        if (*suite)
            return cmd_suite(suitePath, parallelism, cfg);
        if (*verdict)
            return cmd_verdict(verdictOpts, cfg);
        if (*lint)
            return cmd_lint(descriptions, lintFile);
        if (*exportCmd)
            return cmd_export(exportFiles, exportOut, factor, cfg);
        if (*report)
            return cmd_report(reportFiles, technique, cfg);
    }
    catch (InputError const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return ExitInput;
    }
    catch (Error const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.code())
        {
            case ErrorCode::Timeout:
            case ErrorCode::TransportError:
            case ErrorCode::SessionRejected:
            case ErrorCode::SessionGone:
            case ErrorCode::SinkWriteError: return ExitBackend;
            default: return ExitInput;
        }
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return ExitInput;
    }
    return ExitInput;
}
