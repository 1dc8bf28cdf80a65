#include "aels/cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "aels/adaptation.hpp"
#include "aels/canonical.hpp"
#include "aels/config.hpp"
#include "aels/fes.hpp"
#include "aels/ingest.hpp"
#include "aels/repository.hpp"
#include "aels/service.hpp"
#include "aels/simulator.hpp"

namespace aels {

namespace {

struct Options {
    std::string config_path;
    std::string store;
    int pass_threshold = 0;

    std::string events_file, grades_file;
    std::string course, semester, student, query, at;
    bool csv = false;
    std::string test_file, response_file, method;
    bool record = false;
    int k = 0;

    std::uint64_t seed = 42;
    int students = 200, semesters = 4, items = 10, seeds = 20;
    double boost = -1.0;
    std::string policy = "adaptive";
    bool compare = false;
    std::string events_out;

    int port = 0;
};

ServiceConfig effective_config(const Options& o) {
    ServiceConfig cfg = o.config_path.empty() ? ServiceConfig{} : load_config(o.config_path);
    if (!o.store.empty()) cfg.store = o.store;
    if (o.pass_threshold != 0) cfg.pass_threshold = o.pass_threshold;
    if (!o.method.empty()) cfg.method = parse_defuzzifier(o.method);
    if (o.k != 0) cfg.k = o.k;
    if (o.port != 0) cfg.port = o.port;
    cfg.validate();
    return cfg;
}

Timestamp at_or_now(const Options& o, const Repository& repo) {
    return o.at.empty() ? now_at_least(repo) : Timestamp::parse(o.at);
}

int cmd_ingest(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    const bool events = !o.events_file.empty();
    const auto report =
        ingest(repo, events ? o.events_file : o.grades_file, events ? IngestFormat::event_lines : IngestFormat::grades_csv);
    out << to_canonical_json(report) << "\n";
    return report.rejected.empty() ? 0 : 1;
}

int cmd_rank(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    const auto table = repo.build_rank_table(CourseId(o.course), SemesterId(o.semester));
    if (o.csv)
        out << ranking::to_csv(table);
    else
        out << ranking::to_canonical_json(table) << "\n";
    return 0;
}

int cmd_estimate(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    const auto def = parse_test_definition(read_file(o.test_file));
    auto resp = parse_test_response(read_file(o.response_file));
    if (resp.test != def.id())
        throw ArgumentError("response is for test '" + resp.test + "' but the definition is '" + def.id() + "'");
    if (o.record) {
        Repository repo(cfg.store, cfg.repository_config());
        AdaptiveEngine engine(repo, cfg.engine_config());
        out << to_canonical_json(engine.record_estimate(def, resp, at_or_now(o, repo))) << "\n";
        return 0;
    }
    const Timestamp at = o.at.empty() ? Timestamp{} : Timestamp::parse(o.at);
    out << to_canonical_json(fes::estimate_level(def, resp, cfg.method, at)) << "\n";
    return 0;
}

int cmd_suggest(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    AdaptiveEngine engine(repo, cfg.engine_config());
    const auto set = engine.suggest(StudentId(o.student), CourseId(o.course), std::nullopt, at_or_now(o, repo));
    for (const auto& d : set.diagnostics) err << "note: " << d << "\n";
    out << to_canonical_json(set) << "\n";
    return 0;
}

int cmd_students(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    AdaptiveEngine engine(repo, cfg.engine_config());
    std::optional<SemesterId> sem;
    if (!o.semester.empty()) sem = SemesterId(o.semester);
    out << to_canonical_json(engine.rank_students(CourseId(o.course), sem)) << "\n";
    return 0;
}

int cmd_search(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    const CourseId course(o.course);
    const auto items = repo.read([&](const RepositoryState& st, auto) { return search_catalog(st, course, o.query); });
    std::vector<std::string> parts;
    for (const auto& item : items) parts.push_back(to_canonical_json(item));
    out << json_array(parts) << "\n";
    return 0;
}

int cmd_snapshot(const Options& o, std::ostream& out) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    out << repo.snapshot().serialize();
    return 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    sim::CohortParams p;
    p.seed = o.seed;
    p.students = o.students;
    p.semesters = o.semesters;
    p.items = o.items;
    p.policy = sim::parse_policy(o.policy);
    if (o.boost >= 0.0) p.boost = o.boost;
    if (!o.method.empty()) p.method = parse_defuzzifier(o.method);
    if (o.compare) {
        const auto report = sim::compare_policies(p, o.seeds);
        out << (o.csv ? sim::to_csv(report) : sim::to_table(report));
        return 0;
    }
    const auto run = sim::simulate(p);
    if (!o.events_out.empty()) {
        std::ofstream f(o.events_out, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + o.events_out);
        for (const auto& e : run.events) f << encode_event_line(e) << "\n";
    }
    out << (o.csv ? sim::to_csv(run.report) : sim::to_table(run.report));
    return 0;
}

Service* g_service = nullptr;

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = effective_config(o);
    Repository repo(cfg.store, cfg.repository_config());
    std::map<std::string, TestDefinition> tests;
    if (cfg.tests) tests = load_test_definitions(*cfg.tests);
    Service service(repo, cfg, std::move(tests));
    g_service = &service;
    std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
    });
    out << "serving " << cfg.store.string() << " on port " << cfg.port << "\n" << std::flush;
    const bool ok = service.listen();
    g_service = nullptr;
    if (!ok) {
        err << "error: cannot listen on port " << cfg.port << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive learning-content recommendation engine", "aels"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--store", o.store, "event log file (overrides config)");
    app.add_option("--pass-threshold", o.pass_threshold, "lowest passing grade");

    auto* ingest_cmd = app.add_subcommand("ingest", "append records from a file to the store");
    auto* ev = ingest_cmd->add_option("--events", o.events_file, "event-lines file");
    auto* gr = ingest_cmd->add_option("--grades", o.grades_file, "grades CSV file");
    ev->excludes(gr);
    ingest_cmd->require_option(1);

    auto* rank_cmd = app.add_subcommand("rank", "print the rank table of a closed semester");
    rank_cmd->add_option("--course", o.course)->required();
    rank_cmd->add_option("--semester", o.semester)->required();
    rank_cmd->add_flag("--csv", o.csv, "CSV instead of JSON");

    auto* est_cmd = app.add_subcommand("estimate", "estimate a skill level from a test response");
    est_cmd->add_option("--test", o.test_file, "test definition JSON")->required()->check(CLI::ExistingFile);
    est_cmd->add_option("--response", o.response_file, "test response JSON")->required()->check(CLI::ExistingFile);
    est_cmd->add_option("--method", o.method, "maximum or centroid")->check(CLI::IsMember({"maximum", "centroid"}));
    est_cmd->add_option("--at", o.at, "ISO-8601 UTC timestamp");
    est_cmd->add_flag("--record", o.record, "log the estimate to the store");

    auto* sug_cmd = app.add_subcommand("suggest", "suggest content to a student (logs suggest events)");
    sug_cmd->add_option("--student", o.student)->required();
    sug_cmd->add_option("--course", o.course)->required();
    sug_cmd->add_option("--k", o.k, "number of items")->check(CLI::PositiveNumber);
    sug_cmd->add_option("--at", o.at, "ISO-8601 UTC timestamp");

    auto* stu_cmd = app.add_subcommand("students", "rank a course's students by level");
    stu_cmd->add_option("--course", o.course)->required();
    stu_cmd->add_option("--semester", o.semester);

    auto* search_cmd = app.add_subcommand("search", "keyword search over a course catalog");
    search_cmd->add_option("--course", o.course)->required();
    search_cmd->add_option("--query", o.query);

    auto* snap_cmd = app.add_subcommand("snapshot", "print the canonical snapshot with its digest");

    auto* sim_cmd = app.add_subcommand("simulate", "run the synthetic cohort simulator");
    sim_cmd->add_option("--seed", o.seed);
    sim_cmd->add_option("--students", o.students);
    sim_cmd->add_option("--semesters", o.semesters);
    sim_cmd->add_option("--items", o.items);
    sim_cmd->add_option("--policy", o.policy)->check(CLI::IsMember({"adaptive", "random", "none"}));
    sim_cmd->add_option("--boost", o.boost);
    sim_cmd->add_option("--method", o.method)->check(CLI::IsMember({"maximum", "centroid"}));
    sim_cmd->add_flag("--compare", o.compare, "compare all policies over several seeds");
    sim_cmd->add_option("--seeds", o.seeds);
    sim_cmd->add_flag("--csv", o.csv);
    sim_cmd->add_option("--events-out", o.events_out, "write the simulated log as event lines");

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
    serve_cmd->add_option("--port", o.port)->check(CLI::Range(1, 65535));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (ingest_cmd->parsed()) return cmd_ingest(o, out);
        if (rank_cmd->parsed()) return cmd_rank(o, out);
        if (est_cmd->parsed()) return cmd_estimate(o, out);
        if (sug_cmd->parsed()) return cmd_suggest(o, out, err);
        if (stu_cmd->parsed()) return cmd_students(o, out);
        if (search_cmd->parsed()) return cmd_search(o, out);
        if (snap_cmd->parsed()) return cmd_snapshot(o, out);
        if (sim_cmd->parsed()) return cmd_simulate(o, out);
        if (serve_cmd->parsed()) return cmd_serve(o, out, err);
    } catch (const RuleViolation& v) {
        err << "rejected: " << v.what() << "\n";
        return 1;
    } catch (const ArgumentError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace aels
