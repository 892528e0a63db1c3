#include "hardhank/config.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace hardhank;

TEST(RunConfig, DefaultsAreValid) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.nets().aggregate.input_width(), 3 * 10 + 31);
    EXPECT_EQ(c.hidden, (std::vector<int>{32, 32}));
}

TEST(RunConfig, ParsesSectionsAndComments) {
    auto c = RunConfig::parse(
        "# desk run\n"
        "seed = 7\n"
        "model.b_min = -0.1   # analysis value\n"
        "model.phi.min = 900\n"
        "net.hidden = 16, 8\n"
        "net.activation = relu\n"
        "train.regime = soft\n"
        "train.penalty.kkt = 5\n"
        "train.reset_on_oc = true\n"
        "analyze.shock = mp\n"
        "\n");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.params.b_min, -0.1);
    EXPECT_EQ(c.bounds.min[6], 900.0);
    EXPECT_EQ(c.hidden, (std::vector<int>{16, 8}));
    EXPECT_EQ(c.activation, nn::Activation::Relu);
    EXPECT_EQ(c.train.regime, model::Regime::Soft);
    EXPECT_EQ(c.train.weights.kkt, 5.0);
    EXPECT_TRUE(c.train.reset_on_oc);
    EXPECT_EQ(c.analyze.irf.shock, analysis::Shock::MonetaryPolicy);
    EXPECT_EQ(c.trainer().seed, 7u);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
    try {
        RunConfig::parse("seed = 1\ntrain.iteratons = 5\n", "c.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("train.iteratons"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("c.cfg:2"), std::string::npos);
    }
    EXPECT_THROW(RunConfig::parse("seed = x\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("train.iterations = 1.5\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("just words\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("train.regime = medium\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("train.reset_on_kkt = maybe\n"), ConfigError);
    EXPECT_THROW(RunConfig::parse("train.batch = 0\n").validate(), ConfigError);
    EXPECT_THROW(RunConfig::parse("model.phi.min = 2000\n").validate(), ConfigError);
}

TEST(RunConfig, EchoRoundTrips) {
    auto c = RunConfig::parse("seed = 3\nmodel.sigma_a = 0.0123456789012345\ntrain.learning_rate = 3e-4\nnet.hidden = 5\n");
    const auto text = c.to_text();
    auto back = RunConfig::parse(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.to_text(), text);
    EXPECT_EQ(back.params.sigma_a, 0.0123456789012345);
    // Every key appears exactly once in the echo.
    for (const auto& k : RunConfig::keys()) EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
    RunConfig d;
    EXPECT_EQ(RunConfig::parse(d.to_text()), d);
}

TEST(RunConfig, LoadNamesMissingPath) {
    try {
        RunConfig::load("/nonexistent/run.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/run.cfg"), std::string::npos);
    }
    const std::string path = ::testing::TempDir() + "roundtrip.cfg";
    RunConfig c;
    c.seed = 99;
    c.save(path);
    EXPECT_EQ(RunConfig::load(path), c);
}
