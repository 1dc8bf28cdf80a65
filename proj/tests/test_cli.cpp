#include <doctest.h>

#include <sstream>

#include "aels/cli.hpp"
#include "support.hpp"

using namespace aels;
using namespace testsupport;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

void write_events(const std::filesystem::path& p, const std::vector<EventRecord>& events) {
    std::string text;
    for (const auto& e : events) text += encode_event_line(e) + "\n";
    write_text(p, text);
}

std::vector<EventRecord> course_log(bool closed) {
    std::vector<EventRecord> ev = {enroll("L", "C1", "2024-S1", T(0), Role::lecturer),
                                   upload("u", "A", "C1", "2024-S1", T(1), ContentKind::supplement, "Fuzzy Logic Primer"),
                                   approve("L", "A", "C1", "2024-S1", T(2)),
                                   download("s1", "A", "C1", "2024-S1", T(3)),
                                   exam("s1", 8, "C1", "2024-S1", T(4)),
                                   enroll("s2", "C1", "2024-S2", T(5))};
    if (closed) ev.insert(ev.begin() + 5, close_semester("L", "C1", "2024-S1", T(5)));
    return ev;
}

}  // namespace

TEST_CASE("estimate on the 3-of-4 fixture prints level 1") {
    TempDir dir;
    write_text(dir / "t.json", R"({"id":"mid","course":"C1","n":4})");
    write_text(dir / "r.json", R"({"test":"mid","student":"s1","results":[1,1,1,0]})");
    const auto r = run({"estimate", "--test", (dir / "t.json").string(), "--response", (dir / "r.json").string(),
                        "--method", "maximum", "--at", "2024-05-01T00:00:00Z"});
    CHECK(r.code == 0);
    CHECK(r.out ==
          R"({"student":"s1","course":"C1","level":1,"solved":0.75,"method":"maximum","at":"2024-05-01T00:00:00.000Z"})"
          "\n");
    const auto c = run({"estimate", "--test", (dir / "t.json").string(), "--response", (dir / "r.json").string(),
                        "--method", "centroid"});
    CHECK(c.out.find(R"("level":0.5833333333333334)") != std::string::npos);
}

TEST_CASE("rank before the semester is closed exits 1") {
    TempDir dir;
    write_events(dir / "in.jsonl", course_log(false));
    const auto store = (dir / "store.log").string();
    CHECK(run({"--store", store, "ingest", "--events", (dir / "in.jsonl").string()}).code == 0);
    const auto r = run({"--store", store, "rank", "--course", "C1", "--semester", "2024-S1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("semester not closed") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("rank after close prints JSON or CSV") {
    TempDir dir;
    write_events(dir / "in.jsonl", course_log(true));
    const auto store = (dir / "store.log").string();
    const auto ing = run({"ingest", "--events", (dir / "in.jsonl").string(), "--store", store});
    CHECK(ing.code == 0);
    CHECK(ing.out == R"({"accepted":7,"rejected":[],"flagged":[]})" "\n");
    const auto json = run({"--store", store, "rank", "--course", "C1", "--semester", "2024-S1"});
    CHECK(json.code == 0);
    CHECK(json.out.rfind(R"({"course":"C1","semester":"2024-S1","entries":[{"rank":1,"content":"A","score":1,)", 0) == 0);
    const auto csv = run({"--store", store, "rank", "--course", "C1", "--semester", "2024-S1", "--csv"});
    CHECK(csv.out.find("\n1,A,1,1,1,0,1,8,8\n") != std::string::npos);
}

TEST_CASE("unknown flags and missing arguments exit 2 with usage text") {
    auto r = run({"rank", "--course", "C1", "--semester", "2024-S1", "--bogus"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage:") != std::string::npos);
    r = run({"rank", "--course", "C1"});
    CHECK(r.code == 2);
    r = run({});
    CHECK(r.code == 2);
    r = run({"suggest", "--student", "s1", "--course", "C1", "--k", "0", "--store", "/tmp/aels-unused.log"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage:") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("ingest with rejected lines exits 1 and reports them") {
    TempDir dir;
    write_text(dir / "g.csv", "student,course,semester,grade\ns1,C1,2024-S1,7\ns2,C1,2024-S1,12\n");
    const auto r = run({"--store", (dir / "s.log").string(), "ingest", "--grades", (dir / "g.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.out.find(R"("accepted":1)") != std::string::npos);
    CHECK(r.out.find("grade_out_of_range") != std::string::npos);
    CHECK(run({"ingest", "--grades", "x", "--events", "y"}).code == 2);
}

TEST_CASE("suggest, students, search and snapshot") {
    TempDir dir;
    write_events(dir / "in.jsonl", course_log(true));
    const auto store = (dir / "store.log").string();
    run({"--store", store, "ingest", "--events", (dir / "in.jsonl").string()});
    const auto s = run({"--store", store, "suggest", "--student", "s2", "--course", "C1", "--at", "2024-09-01T00:00:00Z"});
    CHECK(s.code == 0);
    CHECK(s.out ==
          R"({"student":"s2","course":"C1","items":["A"],"generated_at":"2024-09-01T00:00:00.000Z","rank_table_semester":"2024-S1"})"
          "\n");
    const auto unknown = run({"--store", store, "suggest", "--student", "s2", "--course", "C9"});
    CHECK(unknown.code == 1);

    const auto st = run({"--store", store, "students", "--course", "C1"});
    CHECK(st.code == 0);
    CHECK(st.out.find(R"("unranked":["s2"])") != std::string::npos);

    const auto q = run({"--store", store, "search", "--course", "C1", "--query", "fuzzy"});
    CHECK(q.code == 0);
    CHECK(q.out.find(R"("id":"A")") != std::string::npos);

    const auto snap = run({"--store", store, "snapshot"});
    CHECK(snap.code == 0);
    CHECK(snap.out.rfind("aels-snapshot v1\nas_of_seq 8\n", 0) == 0);
}

TEST_CASE("config file supplies the store and engine settings") {
    TempDir dir;
    write_events(dir / "in.jsonl", course_log(true));
    write_text(dir / "cfg.json", R"({"store":"data.log","k":1,"pass_threshold":9,
        "weights":{"downloads":0.5,"pass_rate":0.5}})");
    const auto cfg = (dir / "cfg.json").string();
    CHECK(run({"--config", cfg, "ingest", "--events", (dir / "in.jsonl").string()}).code == 0);
    CHECK(std::filesystem::exists(dir / "data.log"));
    const auto csv = run({"--config", cfg, "rank", "--course", "C1", "--semester", "2024-S1", "--csv"});
    CHECK(csv.out.find("\n1,A,1,1,0,0,1,8,8\n") != std::string::npos);
    write_text(dir / "bad.json", R"({"weights":{"downloads":0.7}})");
    CHECK(run({"--config", (dir / "bad.json").string(), "snapshot"}).code == 2);
}

TEST_CASE("simulate prints reports and writes replayable logs") {
    TempDir dir;
    const auto r = run({"simulate", "--students", "20", "--semesters", "2", "--seed", "7", "--csv", "--events-out",
                        (dir / "sim.jsonl").string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("seed,policy,semester,pass_rate", 0) == 0);
    const auto store = (dir / "store.log").string();
    CHECK(run({"--store", store, "ingest", "--events", (dir / "sim.jsonl").string()}).code == 0);
    const auto rank = run({"--store", store, "rank", "--course", "SIM101", "--semester", "2024-S1"});
    CHECK(rank.code == 0);
    const auto cmp = run({"simulate", "--students", "20", "--semesters", "2", "--compare", "--seeds", "2"});
    CHECK(cmp.code == 0);
    CHECK(cmp.out.find("adaptive - random") != std::string::npos);
    CHECK(run({"simulate", "--policy", "greedy"}).code == 2);
}
