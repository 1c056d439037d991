#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"
#include "pabc/instances.hpp"
#include "pabc/io.hpp"
#include "pabc/online.hpp"
#include "pabc/rng.hpp"
#include "test_helpers.hpp"

using namespace pabc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pabc_io_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Numbers, SpecialValues) {
    EXPECT_EQ(io::number(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(io::number(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_TRUE(io::number(std::nan("")).is_null());
    EXPECT_TRUE(std::isinf(io::number_from(io::number(std::numeric_limits<double>::infinity()))));
    EXPECT_EQ(io::number_from(io::number(0.1)), 0.1);
    EXPECT_THROW(io::number_from(io::json("abc")), io::FormatError);
}

TEST(MdpJson, RoundTripIsLossless) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const LayeredMdp m = random_mdp(seed, test::small_options());
        const io::json j = io::mdp_to_json(m);
        const LayeredMdp back = io::mdp_from_json(io::json::parse(j.dump()));
        EXPECT_EQ(back.layers, m.layers);
        EXPECT_EQ(back.actions, m.actions);
        EXPECT_EQ(back.transitions, m.transitions);
        EXPECT_EQ(back.rewards, m.rewards);
        EXPECT_EQ(back.initial_state, m.initial_state);
    }
}

TEST(MdpJson, SchemaFieldsAndErrors) {
    const auto cx = build_counterexample();
    const io::json j = io::mdp_to_json(cx.mdp);
    for (const char* key : {"horizon", "layers", "actions", "transitions", "rewards", "initial_state"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["initial_state"], "x0");

    io::json bad = j;
    bad["initial_state"] = "nowhere";
    EXPECT_THROW(io::mdp_from_json(bad), io::FormatError);
    bad = j;
    bad.erase("rewards");
    EXPECT_THROW(io::mdp_from_json(bad), io::FormatError);
}

TEST(TableJson, RoundTripAndRoleCheck) {
    const auto inst = random_instance(2, test::small_options());
    Rng rng(3);
    const Table t = test::random_table(inst.mdp.shape(), rng, -1.0, 1.0);
    const Table back = io::table_from_json(inst.mdp, io::json::parse(io::table_to_json(inst.mdp, t).dump()));
    EXPECT_EQ(back, t);
    EXPECT_THROW(io::table_from_json(inst.mdp, io::table_to_json(inst.mdp, t), TableRole::weight), io::FormatError);
}

TEST(PolicyJson, RoundTrip) {
    const auto cx = build_counterexample();
    const Policy pi = greedy_policy(cx.F[1], cx.greedy);
    const Policy back = io::policy_from_json(cx.mdp, io::policy_to_json(cx.mdp, pi));
    EXPECT_TRUE(back.same_actions(pi));

    const Policy u = Policy::uniform(cx.mdp.shape());
    const Policy ub = io::policy_from_json(cx.mdp, io::policy_to_json(cx.mdp, u));
    EXPECT_DOUBLE_EQ(ub.prob(0, 0, 1), 0.5);
}

TEST(DatasetJson, BothFormatsRoundTrip) {
    const auto inst = random_instance(5, test::small_options());
    const Dataset d = sample_dataset(inst.mdp, inst.data_dist, 40, 77);
    EXPECT_EQ(io::dataset_from_json(io::json::parse(io::dataset_to_json(d).dump())), d);
    EXPECT_EQ(io::dataset_from_json(io::dataset_to_json(d, io::DatasetFormat::columnar)), d);
    EXPECT_EQ(io::dataset_to_json(d)["seed"], 77u);
}

TEST(InstanceJson, RoundTripKeepsTiesAndAnnotations) {
    const auto cx = build_counterexample();
    const NamedInstance back = io::instance_from_json(io::json::parse(io::instance_to_json(cx).dump()));
    EXPECT_EQ(back.name, cx.name);
    EXPECT_EQ(back.F[1], cx.F[1]);
    EXPECT_EQ(back.W[1], cx.W[1]);
    EXPECT_EQ(back.data_dist, cx.data_dist);
    EXPECT_EQ(back.greedy.rule, TieRule::explicit_choice);
    EXPECT_EQ(back.greedy.preferred, cx.greedy.preferred);
    EXPECT_EQ(back.member_tie.preferred, cx.member_tie.preferred);
    EXPECT_EQ(back.annotations.v_star, 1.0);
}

TEST(Export, WritesLoadableFiles) {
    const fs::path dir = scratch("export");
    const auto t1 = build_table1_example();
    io::export_instance(t1, dir);
    for (const char* f : {"mdp.json", "data_distribution.json", "F.json", "W.json", "instance.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    LayeredMdp m;
    const FunctionClass F = io::load_function_class(dir / "F.json", &m);
    EXPECT_EQ(F.size(), 2u);
    EXPECT_EQ(m.layers, t1.mdp.layers);
    EXPECT_EQ(io::load_weight_class(dir / "W.json")[0], t1.W[0]);
    EXPECT_THROW(io::load_weight_class(dir / "F.json"), io::FormatError);
    EXPECT_EQ(io::load_instance(dir / "instance.json").F[1], t1.F[1]);
    fs::remove_all(dir);
}

TEST(Export, MissingAndMalformedFiles) {
    const fs::path dir = scratch("bad");
    EXPECT_THROW(io::read_json(dir / "none.json"), io::FormatError);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_THROW(io::read_json(dir / "broken.json"), io::FormatError);
    fs::remove_all(dir);
}

TEST(SelectionJson, ContainsFeasibilityMatrix) {
    const auto cx = build_counterexample();
    PabcConfig c;
    c.greedy = cx.greedy;
    c.member_tie = cx.member_tie;
    const Selection s = pabc::pabc(cx.F, cx.W, LossSource::population(cx.mdp, cx.data_dist), c);
    const io::json j = io::selection_to_json(cx.mdp, s);
    EXPECT_EQ(j["feasibility"].size(), cx.F.size() * cx.W.size() * cx.mdp.horizon);
    EXPECT_EQ(j["variant"], "population-pabc");
    for (const auto& e : j["feasibility"]) EXPECT_TRUE(e["pass"].get<bool>());
}

TEST(TranscriptJson, Serializes) {
    const auto cx = build_counterexample();
    const Dataset d = sample_dataset(cx.mdp, cx.data_dist, 500, 1);
    Simulator sim(cx.mdp);
    const auto tr = pabc_oa(cx.F, cx.W, LossSource::empirical(cx.mdp, d), sim, {});
    const io::json j = io::transcript_to_json(cx.mdp, tr);
    EXPECT_EQ(j["iterations"].size(), tr.iterations.size());
    EXPECT_EQ(j["total_online_samples"], tr.total_online_samples);
}
