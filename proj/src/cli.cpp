#include "setsim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "setsim/campaign.hpp"
#include "setsim/report.hpp"

namespace setsim {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string circuit;
    std::string tech = "65nm-like";
    std::string stimulus = "random:1000:1";
    std::string out = ".";
    std::uint64_t seed = 1;
    std::size_t max_samples = 100000;
    std::size_t min_samples = 100;
    double stderr_target = 0.10;
    std::string watch;
    std::string capture_policy = "instant";
    unsigned workers = 1;
    std::size_t t_grid = 200;
    bool paper_columns = false;
    std::int64_t debug_sample = -1;

    std::string stats;
    std::string log;
    std::string oracle;
    bool recompute = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("E_IO", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path output_path(const Options& o, const std::string& file) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw input_error("E_IO", "cannot create output directory '" + o.out + "': " + ec.message());
    return fs::path(o.out) / file;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("E_IO", "cannot write '" + path.string() + "'");
    return f;
}

// Combinational netlists get launch and capture registers so strikes have a
// two-edge window to land in.
Circuit load_circuit(const Options& o, std::ostream& err) {
    Circuit c = load_bench_file(o.circuit);
    if (c.flops().empty()) {
        c = wrap_combinational(c);
        err << "note: " << c.name() << " is combinational; wrapped with " << c.flops().size() << " registers\n";
    }
    return c;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out) {
    Circuit c = parse_bench_unchecked(read_file(o.circuit), fs::path(o.circuit).stem().string());
    Diagnostics d = validate(c);
    for (const Diagnostic& e : d.errors)
        out << o.circuit << ':' << e.location.line << ':' << e.location.column << ": error: " << e.code << ": "
            << e.message << '\n';
    for (const Diagnostic& w : d.warnings)
        out << o.circuit << ':' << w.location.line << ':' << w.location.column << ": warning: " << w.code << ": "
            << w.message << '\n';
    out << c.name() << ": " << c.primary_inputs().size() << " inputs, " << c.primary_outputs().size() << " outputs, "
        << c.gates().size() << " gates, " << c.flops().size() << " flops; " << d.errors.size() << " errors, "
        << d.warnings.size() << " warnings\n";
    if (!d.ok()) throw input_error("E_INVALID_CIRCUIT", o.circuit + ": " + std::to_string(d.errors.size()) +
                                                            " validation errors");
    return 0;
}

int cmd_golden(const Options& o, std::ostream& out, std::ostream& err) {
    Circuit c = load_circuit(o, err);
    Topology topo(c);
    Trace trace = simulate_reference(c, topo, resolve_stimulus(o.stimulus));
    fs::path path = output_path(o, "trace.csv");
    auto f = open_output(path);
    write_trace_csv(f, c, trace);
    out << "wrote " << path.string() << " (" << trace.cycle_count() << " cycles, " << c.flops().size()
        << " flops)\n";
    return 0;
}

int cmd_campaign(const Options& o, std::ostream& out, std::ostream& err) {
    CampaignConfig cfg;
    cfg.rng_seed = o.seed;
    cfg.max_samples = o.max_samples;
    cfg.min_samples = o.min_samples;
    cfg.stderr_target = o.stderr_target;
    cfg.policy = CapturePolicy::parse(o.capture_policy);
    cfg.workers = o.workers;
    if (!o.watch.empty()) {
        cfg.watched = outcome_from_string(o.watch);
        if (!cfg.watched) throw usage_error("E_USAGE", "--watch must name an outcome class such as NF or FN");
    }
    if (o.debug_sample >= 0) cfg.debug_sample = static_cast<std::uint64_t>(o.debug_sample);
    cfg.validate();

    CampaignContext ctx(load_circuit(o, err), resolve_profile(o.tech), resolve_stimulus(o.stimulus));
    CampaignResult r = run_campaign(ctx, cfg);

    fs::path stats_path = output_path(o, "stats.json");
    fs::path log_path = output_path(o, "samples.csv");
    open_output(stats_path) << stats_to_json(r.stats);
    {
        auto f = open_output(log_path);
        write_sample_log(f, r.log);
    }
    if (o.debug_sample >= 0) {
        if (!r.debug) throw usage_error("E_RANGE", "--debug-sample " + std::to_string(o.debug_sample) +
                                                       " was not drawn (campaign stopped after " +
                                                       std::to_string(r.log.size()) + " samples)");
        fs::path dbg_path = output_path(o, "debug_sample.txt");
        auto f = open_output(dbg_path);
        const SampleRecord& rec = r.log[static_cast<std::size_t>(o.debug_sample)];
        f << "sample " << rec.index << ": drain " << rec.drain << " (" << to_string(rec.strike_class)
          << "), cycle " << rec.cycle << ", t = " << format_number(rec.time) << " ps -> " << to_string(rec.outcome)
          << '\n';
        for (const PulseEvent& p : r.debug->pulses)
            f << "pulse " << ctx.circuit().net_name(p.net) << " start " << format_number(p.start) << " width "
              << format_number(p.width) << " value " << (p.disturbed_value ? 1 : 0) << '\n';
        for (const std::string& n : r.debug->notes) f << n << '\n';
    }
    write_text_report(out, make_report(r.stats), o.paper_columns);
    out << "\nwrote " << stats_path.string() << " and " << log_path.string() << '\n';
    return 0;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
    if (CapturePolicy::parse(o.capture_policy).kind != CapturePolicy::Kind::Instant)
        throw usage_error("E_USAGE", "the exhaustive oracle supports the instant capture policy only");
    CampaignContext ctx(load_circuit(o, err), resolve_profile(o.tech), resolve_stimulus(o.stimulus));
    CampaignStats s = exhaustive_campaign(ctx, o.t_grid, o.workers);
    fs::path path = output_path(o, "oracle.json");
    open_output(path) << stats_to_json(s);
    write_text_report(out, make_report(s), o.paper_columns);
    out << "\nwrote " << path.string() << '\n';
    return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
    CampaignStats stats = stats_from_json(read_file(o.stats));
    if (o.recompute) {
        if (o.log.empty()) throw usage_error("E_USAGE", "--recompute needs --log");
        std::istringstream in(read_file(o.log));
        CampaignStats again = stats_from_log(read_sample_log(in), stats);
        if (stats_to_json(again) != stats_to_json(stats))
            throw invariant_error("E_RECOMPUTE", "statistics recomputed from " + o.log + " differ from " + o.stats);
        out << "recompute: statistics match the sample log\n\n";
    }
    std::optional<CampaignStats> oracle;
    if (!o.oracle.empty()) oracle = stats_from_json(read_file(o.oracle));
    ReportBundle r = make_report(stats, oracle);

    {
        auto f = open_output(output_path(o, "outcomes.csv"));
        write_outcome_csv(f, r, o.paper_columns);
    }
    {
        auto f = open_output(output_path(o, "metrics.csv"));
        write_metrics_csv(f, r);
    }
    if (oracle) {
        auto f = open_output(output_path(o, "comparison.csv"));
        write_comparison_csv(f, r);
    }
    std::ostringstream text;
    write_text_report(text, r, o.paper_columns);
    open_output(output_path(o, "report.txt")) << text.str();
    out << text.str();
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Single-event transient fault injection for gate-level netlists", "setsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "setsim 0.1.0");

    auto circuit_opt = [&](CLI::App* sub) {
        sub->add_option("--circuit", o.circuit, "bench netlist")->required()->check(CLI::ExistingFile);
    };
    auto run_opts = [&](CLI::App* sub) {
        sub->add_option("--tech", o.tech, "bundled profile label or JSON path")->capture_default_str();
        sub->add_option("--stimulus", o.stimulus, "stimulus file or random:<cycles>:<seed>")->capture_default_str();
        sub->add_option("--workers", o.workers, "worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };
    auto out_opt = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
    };

    auto* validate_cmd = app.add_subcommand("validate", "parse a netlist and report structural problems");
    circuit_opt(validate_cmd);

    auto* golden_cmd = app.add_subcommand("golden", "write the fault-free register trace");
    circuit_opt(golden_cmd);
    golden_cmd->add_option("--stimulus", o.stimulus, "stimulus file or random:<cycles>:<seed>")->capture_default_str();
    out_opt(golden_cmd);

    auto* campaign_cmd = app.add_subcommand("campaign", "Monte Carlo strike campaign");
    circuit_opt(campaign_cmd);
    run_opts(campaign_cmd);
    out_opt(campaign_cmd);
    campaign_cmd->add_option("--seed", o.seed, "campaign seed")->capture_default_str();
    campaign_cmd->add_option("--max-samples", o.max_samples)->capture_default_str();
    campaign_cmd->add_option("--min-samples", o.min_samples)->capture_default_str();
    campaign_cmd->add_option("--stderr-target", o.stderr_target, "relative standard error to stop at")
        ->capture_default_str();
    campaign_cmd->add_option("--watch", o.watch, "outcome class the stopping rule watches (default 1 - P_NN)");
    campaign_cmd->add_option("--capture-policy", o.capture_policy, "instant | window-random:<p>")
        ->capture_default_str();
    campaign_cmd->add_option("--debug-sample", o.debug_sample, "write a pulse trace for this sample index");
    campaign_cmd->add_flag("--paper-columns", o.paper_columns, "print only NN/NF/FN/FF");

    auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive enumeration over a time grid");
    circuit_opt(oracle_cmd);
    run_opts(oracle_cmd);
    out_opt(oracle_cmd);
    oracle_cmd->add_option("--t-grid", o.t_grid, "time points per cycle")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    oracle_cmd->add_option("--capture-policy", o.capture_policy, "must be instant")->capture_default_str();
    oracle_cmd->add_flag("--paper-columns", o.paper_columns, "print only NN/NF/FN/FF");

    auto* report_cmd = app.add_subcommand("report", "render tables from campaign statistics");
    report_cmd->add_option("--stats", o.stats, "stats.json from campaign or oracle")
        ->required()
        ->check(CLI::ExistingFile);
    report_cmd->add_option("--log", o.log, "samples.csv from the same campaign")->check(CLI::ExistingFile);
    report_cmd->add_option("--oracle", o.oracle, "oracle.json to compare against")->check(CLI::ExistingFile);
    report_cmd->add_flag("--recompute", o.recompute, "recompute statistics from --log and require an exact match");
    report_cmd->add_flag("--paper-columns", o.paper_columns, "emit only NN/NF/FN/FF");
    out_opt(report_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "setsim 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        err << "error: E_USAGE: " << msg << '\n';
        return static_cast<int>(ErrorKind::usage);
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(o, out);
        if (golden_cmd->parsed()) return cmd_golden(o, out, err);
        if (campaign_cmd->parsed()) return cmd_campaign(o, out, err);
        if (oracle_cmd->parsed()) return cmd_oracle(o, out, err);
        if (report_cmd->parsed()) return cmd_report(o, out);
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << e.code() << ": " << msg << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::bad_alloc&) {
        err << "error: E_MEMORY: out of memory\n";
        return static_cast<int>(ErrorKind::invariant);
    }
    return static_cast<int>(ErrorKind::usage);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace setsim
