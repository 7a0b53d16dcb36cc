#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "camvo/config_io.hpp"
#include "camvo/engine.hpp"
#include "camvo/report.hpp"
#include "camvo/sweep.hpp"
#include "fixtures.hpp"

using namespace camvo;

namespace {

const char* kHeader = R"({"d": 2, "K": 5, "M": 3, "arms": [{"name":"a","rho":1},{"name":"b","rho":2},{"name":"c","rho":3},{"name":"d","rho":4},{"name":"e","rho":5}]})";

std::string record(const std::string& id, const std::string& votes, const std::string& extra = "") {
    return R"({"id": ")" + id + R"(", "embedding": [0.5, 1], "tokens": [1,2,3,4,5], "votes": )" + votes + extra + "}";
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

std::string log_text(const RunResult& r) {
    std::ostringstream out;
    write_round_log(out, r.rounds);
    return out.str();
}

}  // namespace

TEST(LoadDataset, WellFormedFileKeepsOrder) {
    std::istringstream in(std::string(kHeader) + "\n" + record("x1", "[0,1,2,0,1]", R"(, "label": 1)") + "\n" +
                          record("x2", "[0,0,0,0,0]") + "\n\n" + record("x3", "[2,2,2,2,2]") + "\n");
    const Dataset ds = load_dataset(in, "f.jsonl");
    ASSERT_EQ(ds.instances.size(), 3u);
    EXPECT_EQ(ds.instances[0].instance_id, "x1");
    EXPECT_EQ(ds.instances[2].instance_id, "x3");
    EXPECT_EQ(ds.instances[0].true_label, 1);
    EXPECT_FALSE(ds.has_true_labels());
    EXPECT_EQ(ds.header.arms[4].cost_per_token, 5);
}

TEST(LoadDataset, MissingVoteNamesInstanceAndArm) {
    std::istringstream in(std::string(kHeader) + "\n" + record("q7", "[0,1,2,0]") + "\n");
    const std::string msg = error_of([&] { load_dataset(in, "f.jsonl"); });
    EXPECT_NE(msg.find("q7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("arm 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("f.jsonl:2"), std::string::npos) << msg;
}

TEST(LoadDataset, EmbeddingLengthMismatch) {
    std::istringstream in(std::string(kHeader) + "\n" +
                          R"({"id": "z", "embedding": [1,2,3], "tokens": [1,1,1,1,1], "votes": [0,0,0,0,0]})" + "\n");
    EXPECT_NE(error_of([&] { load_dataset(in); }).find("dimension mismatch"), std::string::npos);
}

TEST(LoadDataset, ParseErrorReportsLine) {
    std::istringstream in(std::string(kHeader) + "\n" + record("a", "[0,0,0,0,0]") + "\n{oops\n");
    EXPECT_NE(error_of([&] { load_dataset(in, "d"); }).find("d:3: parse error"), std::string::npos);
}

TEST(LoadDataset, TokenFallbackFromText) {
    std::istringstream in(std::string(kHeader) + "\n" +
                          R"({"id": "t", "embedding": [0,1], "text": "héllo wörld", "votes": [0,0,0,0,0]})" + "\n");
    const Dataset ds = load_dataset(in);
    EXPECT_TRUE(ds.token_fallback);
    EXPECT_EQ(ds.instances[0].token_counts, (std::vector<std::int64_t>(5, 3)));
}

TEST(Shuffle, DeterministicAndComplete) {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    EXPECT_EQ(shuffle(v, 12), shuffle(v, 12));
    EXPECT_EQ(shuffle(std::vector<int>{9}, 3), std::vector<int>{9});
    std::set<std::vector<int>> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(shuffle(std::vector<int>{0, 1, 2}, s));
    EXPECT_EQ(seen.size(), 6u);
}

TEST(Metrics, Examples) {
    const std::vector<Label> y{0, 1, 2, 1};
    auto m = compute_metrics(y, y, 3);
    EXPECT_EQ(m.accuracy, 1.0);
    for (const auto& l : m.per_label) EXPECT_EQ(l.f1, 1.0);

    const std::vector<Label> pred{0, 0, 0, 0}, truth{0, 1, 0, 1};
    m = compute_metrics(pred, truth, 2);
    EXPECT_EQ(m.accuracy, 0.5);
    EXPECT_EQ(m.per_label[0].recall, 1.0);
    EXPECT_EQ(m.per_label[0].precision, 0.5);

    m = compute_metrics(std::vector<Label>{0, 1}, std::vector<Label>{0, 1}, 3);
    EXPECT_TRUE(m.per_label[2].undefined);
    EXPECT_EQ(m.per_label[2].precision, 0.0);
    EXPECT_EQ(m.per_label[2].recall, 0.0);
    EXPECT_EQ(m.per_label[2].f1, 0.0);
}

class RunTest : public ::testing::Test {
  protected:
    Dataset ds = fixtures::random_dataset(400, 4, 3, {0.9, 0.75, 0.6, 0.85, 0.55}, 77);
};

TEST_F(RunTest, DeltaOneWithExactQueriesEverything) {
    PolicyConfig c;
    c.delta = 1.0;
    c.confidence_method = ConfidenceMethod::exact;
    const auto r = run(ds, c);
    PolicyConfig b;
    b.mode = Mode::baseline;
    const auto base = run(ds, b);
    for (const auto& rr : r.rounds) EXPECT_EQ(rr.decision.arms.size(), 5u);
    EXPECT_NEAR(r.summary.total_cost, base.summary.total_cost, 1e-9);
}

TEST_F(RunTest, KminEqualKMatchesFullMajority) {
    PolicyConfig c;
    c.k_min = 5;
    PolicyConfig f;
    f.mode = Mode::full_majority;
    const auto a = run(ds, c);
    const auto b = run(ds, f);
    ASSERT_EQ(a.rounds.size(), b.rounds.size());
    for (std::size_t t = 0; t < a.rounds.size(); ++t) EXPECT_EQ(a.rounds[t].predicted, b.rounds[t].predicted);
}

TEST_F(RunTest, SingleArmRoundsLeaveStateUntouched) {
    PolicyConfig c;
    c.delta = 0.6;
    LabelingEngine engine(ds.header, c);
    std::size_t singles = 0;
    for (std::size_t t = 0; t < ds.instances.size(); ++t) {
        const auto before = engine.arms();
        const auto rec = engine.step(ds.instances[t], t + 1);
        if (rec.decision.arms.size() == 1) {
            ++singles;
            EXPECT_EQ(engine.arms(), before);
        }
    }
    EXPECT_GT(singles, 0u);
}

TEST_F(RunTest, ColdStartSelectsEveryArm) {
    for (auto m : {ConfidenceMethod::exact, ConfidenceMethod::beta_cdf}) {
        PolicyConfig c;
        c.delta = 0.51;
        c.confidence_method = m;
        LabelingEngine engine(ds.header, c);
        const auto rec = engine.step(ds.instances[0], 1);
        EXPECT_EQ(rec.decision.arms.size(), 5u);
        EXPECT_TRUE(rec.decision.fell_back_to_all);
    }
}

TEST_F(RunTest, LogsAreByteIdenticalAcrossRuns) {
    for (auto mode : {Mode::camvo, Mode::ccamvo, Mode::baseline, Mode::full_majority}) {
        PolicyConfig c;
        c.mode = mode;
        c.seed = 5;
        if (mode == Mode::ccamvo) {
            c.confidence_method = ConfidenceMethod::monte_carlo;
            c.mc_samples = 300;
        }
        EXPECT_EQ(log_text(run(ds, c)), log_text(run(ds, c)));
    }
}

TEST_F(RunTest, CumulativeCostIsConserved) {
    PolicyConfig c;
    const auto r = run(ds, c);
    double sum = 0;
    for (const auto& rr : r.rounds) {
        sum += rr.decision.cost;
        EXPECT_NEAR(rr.cumulative_cost, sum, 1e-9);
        EXPECT_GT(rr.decision.cost, 0);
    }
    EXPECT_NEAR(r.summary.total_cost, sum, 1e-9);
}

TEST_F(RunTest, CamvoNeverCostsMoreThanBaseline) {
    PolicyConfig b;
    b.mode = Mode::baseline;
    const double base = run(ds, b).summary.total_cost;
    for (double delta : {0.5, 0.8, 0.95, 1.0}) {
        PolicyConfig c;
        c.delta = delta;
        EXPECT_LE(run(ds, c).summary.total_cost, base + 1e-9);
    }
}

TEST_F(RunTest, BaselineCostIsFullSum) {
    PolicyConfig b;
    b.mode = Mode::baseline;
    const auto r = run(ds, b);
    double expect = 0;
    for (const auto& inst : ds.instances)
        for (std::size_t i = 0; i < 5; ++i)
            expect += ds.header.arms[i].cost_per_token * static_cast<double>(inst.token_counts[i]);
    EXPECT_NEAR(r.summary.total_cost, expect, 1e-9);
}

TEST_F(RunTest, InverseInvariantHolds) {
    PolicyConfig c;
    RunOptions o;
    o.check_invariants = true;
    EXPECT_NO_THROW(run(ds, c, o));
}

TEST_F(RunTest, AccuracyPresentOnlyWithLabels) {
    EXPECT_TRUE(run(ds, PolicyConfig{}).summary.accuracy.has_value());
    Dataset unlabeled = ds;
    unlabeled.instances[3].true_label.reset();
    const auto r = run(unlabeled, PolicyConfig{});
    EXPECT_FALSE(r.summary.accuracy.has_value());
    EXPECT_TRUE(r.summary.per_label.empty());
}

TEST(Baseline, SingleArmPredictsItsOwnLabels) {
    const auto ds = fixtures::random_dataset(50, 2, 3, {0.6}, 1);
    PolicyConfig b;
    b.mode = Mode::baseline;
    for (const auto& rr : run(ds, b, {false}).rounds) EXPECT_EQ(rr.predicted, rr.votes[0]);
}

TEST(RoundLog, WriteParseRoundtrip) {
    const auto ds = fixtures::random_dataset(60, 3, 3, {0.9, 0.7, 0.8}, 2);
    const auto r = run(ds, PolicyConfig{});
    std::istringstream in(log_text(r));
    const auto rows = read_round_log(in);
    ASSERT_EQ(rows.size(), r.rounds.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
        EXPECT_EQ(rows[t].subset, r.rounds[t].decision.mask());
        EXPECT_EQ(rows[t].cost, r.rounds[t].decision.cost);
        EXPECT_EQ(rows[t].cumulative_cost, r.rounds[t].cumulative_cost);
        EXPECT_EQ(rows[t].predicted, r.rounds[t].predicted);
        EXPECT_EQ(rows[t].rewards, reward_mask(r.rounds[t]));
    }
    const Json m = metrics_from_log(rows, 3);
    EXPECT_DOUBLE_EQ(m.at("accuracy").get<double>(), *r.summary.accuracy);
}

TEST(ConfigFile, ParsesPolicyKeys) {
    std::istringstream in("# comment\ndataset = d.jsonl\ndelta = 0.8  # trailing\nk_min=3\nmode = ccamvo\n"
                          "confidence_method = monte_carlo\nseed = 42\n");
    const RunFile f = run_file_from(parse_key_values(in));
    EXPECT_EQ(f.dataset, "d.jsonl");
    EXPECT_EQ(f.config.delta, 0.8);
    EXPECT_EQ(f.config.k_min, 3u);
    EXPECT_EQ(f.config.mode, Mode::ccamvo);
    EXPECT_EQ(f.config.seed, 42u);
}

TEST(ConfigFile, RejectsUnknownAndMalformed) {
    std::istringstream a("colour = blue\n");
    EXPECT_THROW(run_file_from(parse_key_values(a)), Error);
    std::istringstream b("delta = high\n");
    EXPECT_THROW(run_file_from(parse_key_values(b)), Error);
    std::istringstream c("delta 0.9\n");
    EXPECT_THROW(parse_key_values(c), Error);
}

TEST(Sweep, OneRowPerCellWithTargets) {
    const auto ds = fixtures::random_dataset(150, 3, 3, {0.9, 0.7, 0.8, 0.75}, 3);
    std::istringstream in("deltas = 0.9, 0.8\nk_mins = 1, 3\nseeds = 7\n");
    const SweepGrid g = sweep_grid_from(parse_key_values(in));
    const auto rows = sweep(ds, g);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.target_accuracy, r.delta * r.majority_accuracy);
    const auto again = sweep(ds, g);
    std::ostringstream a, b;
    write_sweep_table(a, rows);
    write_sweep_table(b, again);
    EXPECT_EQ(a.str(), b.str());
}
