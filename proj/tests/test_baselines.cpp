#include "prep/baselines.hpp"

#include "prep/path_count.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <numeric>

using namespace prep;

TEST_CASE("base_scores: printed formulas") {
    Rng rng(71);
    PathCountTable pc = testutil::random_table(rng, 1, 1, 2);
    const int u = pc.pairs[0].u, v = pc.pairs[0].v;

    pc.counts(0, 0) = 4.0;
    pc.cycles(u, 0) = 4.0;
    pc.cycles(v, 0) = 4.0;
    CHECK(base_scores(pc, BaseMeasure::PathSim, 0)(0) == doctest::Approx(1.0));

    pc.counts(0, 0) = 2.0;
    pc.cycles(u, 0) = 1.0;
    pc.cycles(v, 0) = 4.0;
    CHECK(base_scores(pc, BaseMeasure::JoinSim, 0)(0) == doctest::Approx(1.0));

    pc.counts(0, 0) = 7.0;
    CHECK(base_scores(pc, BaseMeasure::PathCount, 0)(0) == doctest::Approx(7.0));

    WarningList warn;
    pc.cycles(u, 0) = 0.0;
    CHECK(base_scores(pc, BaseMeasure::JoinSim, 0, &warn)(0) == doctest::Approx(0.0));
    CHECK(!warn.empty());
}

TEST_CASE("base_scores properties: PathSim bound and JoinSim identity") {
    Rng rng(72);
    PathCountTable pc = testutil::random_table(rng, 30, 2, 12, /*with_cycles=*/true);
    // PathSim needs P_uv <= min(P_uu, P_vv) for the [0,1] bound, which holds
    // for true cycle/path counts; enforce it on the random data.
    for (int s = 0; s < pc.num_pairs(); ++s)
        for (int t = 0; t < 2; ++t)
            pc.counts(s, t) = std::min({pc.counts(s, t), pc.cycles(pc.pairs[static_cast<size_t>(s)].u, t),
                                        pc.cycles(pc.pairs[static_cast<size_t>(s)].v, t)});
    for (int t = 0; t < 2; ++t) {
        const Eigen::VectorXd ps = base_scores(pc, BaseMeasure::PathSim, t);
        const Eigen::VectorXd js = base_scores(pc, BaseMeasure::JoinSim, t);
        for (int s = 0; s < pc.num_pairs(); ++s) {
            CHECK(ps(s) >= 0.0);
            CHECK(ps(s) <= 1.0 + 1e-12);
            const auto& pr = pc.pairs[static_cast<size_t>(s)];
            const bool at_one = std::abs(2.0 * pc.counts(s, t) -
                                         (pc.cycles(pr.u, t) + pc.cycles(pr.v, t))) < 1e-12;
            CHECK((std::abs(ps(s) - 1.0) < 1e-12) == at_one);
            // Scalar re-evaluation of the JoinSim formula.
            const double expected = pc.counts(s, t) /
                                    std::sqrt(pc.cycles(pr.u, t) * pc.cycles(pr.v, t));
            CHECK(js(s) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("simrank: decay 0 collapses to the identity") {
    Rng rng(73);
    PathCountTable pc = testutil::random_table(rng, 5, 1, 5, true);
    SimRankResult r = simrank_metapath(pc, 0, {0.0, 1e-4, 50});
    CHECK(r.pair_scores.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r.converged);
}

TEST_CASE("simrank: two users sharing one neighbor score C at the first sweep") {
    HinGraph g;
    g.add_node("u", "user");
    g.add_node("v", "user");
    g.add_node("x", "item");
    for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
             {"u", "x"}, {"v", "x"}}) {
        g.add_edge(a, b, "likes");
        g.add_edge(b, a, "likes");
    }
    MetaPath mp = parse_metapath("user:likes:item:likes:user", true);
    PathCountTable pc = count_paths(g, {mp});
    REQUIRE(pc.num_pairs() == 1);

    SimRankResult one_sweep = simrank_metapath(g, pc, mp, {0.5, 1e-4, 1});
    CHECK(one_sweep.pair_scores(0) == doctest::Approx(0.5).epsilon(1e-12));
    SimRankResult fixed = simrank_metapath(g, pc, mp, {0.5, 1e-10, 100});
    CHECK(fixed.pair_scores(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("simrank: contraction, symmetry, and unit diagonal on random tables") {
    Rng rng(74);
    for (int trial = 0; trial < 5; ++trial) {
        PathCountTable pc = testutil::random_table(rng, 20, 1, 10, true);
        SimRankConfig cfg{0.9, 1e-8, 80};
        SimRankResult r = simrank_metapath(pc, 0, cfg);
        for (size_t i = 1; i < r.deltas.size(); ++i)
            CHECK(r.deltas[i] <= r.deltas[i - 1] + 1e-12);

        // Recompute the final S to inspect symmetry and the diagonal.
        const int n = pc.num_nodes();
        std::vector<Eigen::Triplet<double>> trips;
        for (int s = 0; s < pc.num_pairs(); ++s) {
            const auto& pr = pc.pairs[static_cast<size_t>(s)];
            trips.emplace_back(pr.u, pr.v, pc.counts(s, 0));
            trips.emplace_back(pr.v, pr.u, pc.counts(s, 0));
        }
        for (int z = 0; z < n; ++z)
            trips.emplace_back(z, z, pc.cycles(z, 0));
        Eigen::SparseMatrix<double> a(n, n);
        a.setFromTriplets(trips.begin(), trips.end());
        a = detail::column_normalize(a);
        Eigen::MatrixXd s_mat = Eigen::MatrixXd::Identity(n, n);
        for (int it = 0; it < 80; ++it)
            s_mat = (cfg.decay * (a.transpose() * (s_mat * a).eval()))
                        .cwiseMax(Eigen::MatrixXd::Identity(n, n));
        CHECK((s_mat - s_mat.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        for (int z = 0; z < n; ++z)
            CHECK(s_mat(z, z) == 1.0);
    }
}

TEST_CASE("heuristic_weights: reciprocal mean and population sd") {
    std::vector<Eigen::VectorXd> tables(2);
    tables[0] = Eigen::VectorXd::Constant(3, 2.0);
    tables[1].resize(2);
    tables[1] << 1.0, 3.0;
    BaselineWeights mean_w = heuristic_weights(tables, WeightHeuristic::Mean);
    CHECK(mean_w.w(0) == doctest::Approx(0.5));
    BaselineWeights sd_w = heuristic_weights(tables, WeightHeuristic::Sd);
    CHECK(sd_w.w(1) == doctest::Approx(1.0)); // population sd of {1,3} is 1
    CHECK(sd_w.w(0) == doctest::Approx(0.0)); // constant scores: sd degenerate
    CHECK(!sd_w.warnings.empty());

    std::vector<Eigen::VectorXd> zeros(1);
    zeros[0] = Eigen::VectorXd::Zero(4);
    BaselineWeights zw = heuristic_weights(zeros, WeightHeuristic::Mean);
    CHECK(zw.w(0) == doctest::Approx(0.0));
    CHECK(!zw.warnings.empty());
}

TEST_CASE("composite: linear combination and zero-weight column drop") {
    Rng rng(75);
    PathCountTable pc = testutil::random_table(rng, 1, 2, 2);
    std::vector<Eigen::VectorXd> tables(2);
    tables[0] = Eigen::VectorXd::Constant(1, 0.3);
    tables[1] = Eigen::VectorXd::Constant(1, 0.7);
    BaselineWeights w;
    w.w = Eigen::VectorXd::Ones(2);
    CHECK(composite(pc, tables, w, "x").entries[0].score == doctest::Approx(1.0));

    // Zero-weight meta-path contributes nothing.
    PathCountTable pc3 = testutil::random_table(rng, 8, 3, 6);
    std::vector<Eigen::VectorXd> t3;
    for (int t = 0; t < 3; ++t)
        t3.push_back(base_scores(pc3, BaseMeasure::PathCount, t));
    BaselineWeights w3;
    w3.w.resize(3);
    w3.w << 0.7, 0.0, 1.3;
    ScoreTable full = composite(pc3, t3, w3, "x");
    PathCountTable reduced = pc3;
    reduced.counts = Eigen::MatrixXd(pc3.counts.rows(), 2);
    reduced.counts.col(0) = pc3.counts.col(0);
    reduced.counts.col(1) = pc3.counts.col(2);
    reduced.metapath_names = {"t1", "t3"};
    reduced.metapath_symmetric = {true, true};
    reduced.cycles = Eigen::MatrixXd::Zero(pc3.num_nodes(), 2);
    std::vector<Eigen::VectorXd> t2;
    for (int t = 0; t < 2; ++t)
        t2.push_back(base_scores(reduced, BaseMeasure::PathCount, t));
    BaselineWeights w2;
    w2.w.resize(2);
    w2.w << 0.7, 1.3;
    ScoreTable dropped = composite(reduced, t2, w2, "x");
    for (size_t i = 0; i < full.entries.size(); ++i)
        CHECK(full.entries[i].score == doctest::Approx(dropped.entries[i].score).epsilon(1e-14));
}

TEST_CASE("composite ranking is invariant under uniform weight scaling") {
    Rng rng(76);
    PathCountTable pc = testutil::random_table(rng, 15, 3, 8);
    std::vector<Eigen::VectorXd> tables;
    for (int t = 0; t < 3; ++t)
        tables.push_back(base_scores(pc, BaseMeasure::PathCount, t));
    BaselineWeights w;
    w.w.resize(3);
    w.w << 0.2, 1.1, 0.5;
    ScoreTable a = composite(pc, tables, w, "x");
    BaselineWeights w_scaled = w;
    w_scaled.w *= 17.0;
    ScoreTable b = composite(pc, tables, w_scaled, "x");
    auto argsort = [](const ScoreTable& st) {
        std::vector<size_t> order(st.entries.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
            return st.entries[x].score > st.entries[y].score;
        });
        return order;
    };
    CHECK(argsort(a) == argsort(b));
}

TEST_CASE("Table-style toy fixture: composites and the 0.67 PathSim term") {
    const std::string dir = PREP_FIXTURE_DIR "/toy";
    HinGraph g = load_graph(dir + "/nodes.tsv", dir + "/edges.tsv");
    std::vector<MetaPath> mps = load_metapaths(dir + "/metapaths.tsv");
    PathCountTable pc = count_paths(g, mps);

    const double w1 = 0.3, w2 = 0.5, w3 = 0.7;
    std::vector<Eigen::VectorXd> tables;
    for (int t = 0; t < 3; ++t)
        tables.push_back(base_scores(pc, BaseMeasure::PathCount, t));
    BaselineWeights w;
    w.w.resize(3);
    w.w << w1, w2, w3;
    ScoreTable pcount = composite(pc, tables, w, "pathcount");
    pcount.ensure_index();
    CHECK(pcount.oriented_score("mordo", "wong") == doctest::Approx(w1 + w2).epsilon(1e-14));
    CHECK(pcount.oriented_score("mordo", "stephen") == doctest::Approx(w1 + w3).epsilon(1e-14));

    const Eigen::VectorXd pathsim_m1 = base_scores(pc, BaseMeasure::PathSim, 0);
    const int row = pc.row_of(pc.node_of("mordo"), pc.node_of("wong"));
    REQUIRE(row >= 0);
    CHECK(std::round(pathsim_m1(row) * 100.0) / 100.0 == doctest::Approx(0.67));
    const int row2 = pc.row_of(pc.node_of("mordo"), pc.node_of("stephen"));
    CHECK(std::round(pathsim_m1(row2) * 100.0) / 100.0 == doctest::Approx(0.67));
}
