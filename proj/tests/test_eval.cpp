#include "prep/eval.hpp"

#include "prep/path_count.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace prep;
using testutil::TempDir;

namespace {

ScoreTable table_from(std::vector<ScoreTable::Entry> entries, Direction dir) {
    ScoreTable st;
    st.measure_id = "test";
    st.direction = dir;
    st.entries = std::move(entries);
    return st;
}

} // namespace

TEST_CASE("label files: three and four column forms") {
    TempDir dir;
    const std::string three = dir.file("l3.tsv", "a\tb\t1\nc\td\t0\n");
    std::vector<SubTask> tasks = read_label_file(three);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].id == "all");
    CHECK(tasks[0].relevant_count() == 1);
    CHECK(tasks[0].total_count() == 2);

    const std::string four = dir.file("l4.tsv", "a\tb\t1\tg1\nc\td\t0\tg2\ne\tf\t1\tg2\n");
    tasks = read_label_file(four);
    REQUIRE(tasks.size() == 2);
    CHECK(tasks[0].id == "g1");
    CHECK(tasks[1].total_count() == 2);

    CHECK_THROWS_AS(read_label_file(dir.file("bad.tsv", "a\tb\t2\n")), ParseError);
    CHECK_THROWS_AS(read_label_file(dir.file("empty.tsv", "")), ValidationError);
}

TEST_CASE("entity resolution: split sizes, candidates, and tie rule") {
    HinGraph g;
    // One name with a single 4-mention entity; every mention wrote paper p0.
    for (int m = 0; m < 4; ++m)
        g.add_node("m" + std::to_string(m), "author");
    g.add_node("p0", "paper");
    for (int m = 0; m < 4; ++m) {
        g.add_edge("m" + std::to_string(m), "p0", "writes");
        g.add_edge("p0", "m" + std::to_string(m), "writes");
    }
    std::vector<std::pair<std::string, std::string>> labels = {
        {"m0", "smith#0"}, {"m1", "smith#0"}, {"m2", "smith#0"}, {"m3", "smith#0"}};
    EntityResolutionBuild build = build_entity_resolution_tasks(g, labels);
    REQUIRE(build.tasks.size() == 1);
    // One entity split in two: C(1+1, 2) = 1 candidate pair, the relevant one.
    CHECK(build.tasks[0].total_count() == 1);
    CHECK(build.tasks[0].relevant_count() == 1);
    // Mentions merge 2+2 in file order; each half carries two writes edges.
    CHECK(build.graph.node_index.contains("smith#0~0"));
    CHECK(build.graph.node_index.contains("smith#0~1"));
    const MetaPath apa = parse_metapath("author:writes:paper:writes:author", true);
    PathCountTable pc = count_paths(build.graph, {apa});
    const int row = pc.row_of(pc.node_of("smith#0~0"), pc.node_of("smith#0~1"));
    REQUIRE(row >= 0);
    CHECK(pc.counts(row, 0) == doctest::Approx(4.0)); // 2 out-edges x 2 in-edges
    CHECK(pc.cycles(pc.node_of("smith#0~0"), 0) == doctest::Approx(4.0));
}

TEST_CASE("entity resolution: largest entity wins, lowest id breaks ties") {
    HinGraph g;
    for (int m = 0; m < 6; ++m)
        g.add_node("m" + std::to_string(m), "author");
    g.add_node("p", "paper");
    for (int m = 0; m < 6; ++m)
        g.add_edge("m" + std::to_string(m), "p", "writes");

    SUBCASE("sizes 3 and 1: split the size-3 entity") {
        std::vector<std::pair<std::string, std::string>> labels = {
            {"m0", "lee#0"}, {"m1", "lee#0"}, {"m2", "lee#0"}, {"m3", "lee#1"}};
        EntityResolutionBuild build = build_entity_resolution_tasks(g, labels);
        REQUIRE(build.tasks.size() == 1);
        CHECK(build.graph.node_index.contains("lee#0~0"));
        CHECK(build.graph.node_index.contains("lee#0~1"));
        CHECK(build.graph.node_index.contains("lee#1"));
        // Entities + split half: C(2+1, 2) = 3 candidates, one relevant.
        CHECK(build.tasks[0].total_count() == 3);
        CHECK(build.tasks[0].relevant_count() == 1);
    }
    SUBCASE("size tie: lowest entity id is split") {
        std::vector<std::pair<std::string, std::string>> labels = {
            {"m0", "lee#1"}, {"m1", "lee#1"}, {"m2", "lee#0"}, {"m3", "lee#0"}};
        EntityResolutionBuild build = build_entity_resolution_tasks(g, labels);
        CHECK(build.graph.node_index.contains("lee#0~0"));
        CHECK(!build.graph.node_index.contains("lee#1~0"));
    }
    SUBCASE("name whose largest entity has one mention is skipped") {
        std::vector<std::pair<std::string, std::string>> labels = {
            {"m0", "solo#0"}, {"m1", "lee#0"}, {"m2", "lee#0"}};
        EntityResolutionBuild build = build_entity_resolution_tasks(g, labels);
        REQUIRE(build.tasks.size() == 1); // only "lee"
        CHECK(build.tasks[0].id == "lee");
        CHECK(!build.warnings.empty());
        CHECK(build.graph.node_index.contains("solo#0")); // merged, unsplit
    }
}

TEST_CASE("entity resolution rewires edges to the merged nodes") {
    HinGraph g;
    g.add_node("m0", "author");
    g.add_node("m1", "author");
    g.add_node("p", "paper");
    g.add_edge("m0", "p", "writes");
    g.add_edge("p", "m0", "writes");
    g.add_edge("m1", "p", "writes");
    g.add_edge("p", "m1", "writes");
    std::vector<std::pair<std::string, std::string>> labels = {{"m0", "kim#0"},
                                                               {"m1", "kim#0"}};
    EntityResolutionBuild build = build_entity_resolution_tasks(g, labels);
    // Each half keeps its own edge pair to p.
    const MetaPath apa = parse_metapath("author:writes:paper:writes:author", true);
    PathCountTable pc = count_paths(build.graph, {apa});
    const int row = pc.row_of(pc.node_of("kim#0~0"), pc.node_of("kim#0~1"));
    REQUIRE(row >= 0);
    CHECK(pc.counts(row, 0) == doctest::Approx(1.0)); // one shared paper
}

TEST_CASE("evaluate: missing candidates rank last and direction is normalized") {
    std::vector<SubTask> tasks(1);
    tasks[0].id = "t";
    tasks[0].candidates = {{"a", "b"}, {"c", "d"}, {"e", "f"}};
    tasks[0].labels = {1, 0, 0};

    // Lower-is-more-relevant scores; (e, f) missing -> ranks last.
    ScoreTable st = table_from({{"a", "b", 1.0}, {"c", "d", 5.0}},
                               Direction::LowerMoreRelevant);
    EvalReport rep = evaluate(st, tasks);
    REQUIRE(rep.rows.size() == 1);
    CHECK(*rep.rows[0].roc_auc == doctest::Approx(1.0));
    CHECK(*rep.rows[0].reciprocal_rank == doctest::Approx(1.0));

    // Negating the raw scores and flipping the flag gives identical metrics.
    ScoreTable flipped = table_from({{"a", "b", -1.0}, {"c", "d", -5.0}},
                                    Direction::HigherMoreRelevant);
    EvalReport rep2 = evaluate(flipped, tasks);
    CHECK(*rep2.rows[0].roc_auc == *rep.rows[0].roc_auc);
    CHECK(*rep2.rows[0].auprc == *rep.rows[0].auprc);
    CHECK(*rep2.rows[0].reciprocal_rank == *rep.rows[0].reciprocal_rank);
}

TEST_CASE("evaluate: single-class sub-tasks are excluded with a warning") {
    std::vector<SubTask> tasks(2);
    tasks[0] = {"good", {{"a", "b"}, {"c", "d"}}, {1, 0}};
    tasks[1] = {"allneg", {{"e", "f"}, {"g", "h"}}, {0, 0}};
    ScoreTable st = table_from({{"a", "b", 2.0}, {"c", "d", 1.0}, {"e", "f", 1.0},
                                {"g", "h", 3.0}},
                               Direction::HigherMoreRelevant);
    EvalReport rep = evaluate(st, tasks);
    CHECK(rep.rows[1].roc_auc == std::nullopt);
    CHECK(!rep.warnings.empty());
    // Aggregates cover only the scoring sub-task.
    CHECK(rep.aggregates.at("roc_auc").at("uni") == doctest::Approx(1.0));
}

TEST_CASE("report JSON carries fingerprint, rows, and aggregates") {
    std::vector<SubTask> tasks(1);
    tasks[0] = {"t", {{"a", "b"}, {"c", "d"}}, {1, 0}};
    ScoreTable st = table_from({{"a", "b", 2.0}, {"c", "d", 1.0}},
                               Direction::HigherMoreRelevant);
    EvalReport rep = evaluate(st, tasks, "deadbeef");
    nlohmann::ordered_json j = report_to_json(rep, {"labels:123"});
    CHECK(j["config_fingerprint"] == "deadbeef");
    CHECK(j["subtasks"].size() == 1);
    CHECK(j["aggregates"]["roc_auc"].contains("uni"));
    CHECK(j["aggregates"]["roc_auc"].contains("rel"));
    CHECK(j["aggregates"]["roc_auc"].contains("tot"));
    CHECK(j["input_hashes"][0] == "labels:123");
}
