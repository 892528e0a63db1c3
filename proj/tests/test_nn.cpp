#include "hardhank/nn/adam.hpp"
#include "hardhank/nn/checkpoint.hpp"
#include "hardhank/nn/network.hpp"
#include "gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>

namespace ad = hardhank::ad;
namespace nn = hardhank::nn;

TEST(Network, ZeroParametersGiveZeroOutput) {
    nn::NetworkSpec spec{{4, 6, 3}, nn::Activation::Tanh, {}};
    auto y = nn::forward(nn::ParamVector::Zero(spec.num_params()), spec, Eigen::VectorXd::Constant(4, 2.5));
    EXPECT_EQ(y, Eigen::VectorXd::Zero(3));
}

TEST(Network, LinearIdentity) {
    nn::NetworkSpec spec{{3, 3}, nn::Activation::Tanh, {}};
    nn::ParamVector p = nn::ParamVector::Zero(spec.num_params());
    for (int i = 0; i < 3; ++i) p[i * 3 + i] = 1.0;
    Eigen::VectorXd x(3);
    x << 0.5, -2.0, 7.0;
    EXPECT_EQ(nn::forward(p, spec, x), x);
}

TEST(Network, SingleReluUnit) {
    nn::NetworkSpec spec{{1, 1, 1}, nn::Activation::Relu, {}};
    nn::ParamVector p(4);
    p << 1.0, -1.0, 2.0, 0.0;  // W0, b0, W1, b1
    EXPECT_DOUBLE_EQ(nn::forward(p, spec, Eigen::VectorXd::Constant(1, 3.0))[0], 4.0);
}

TEST(Network, ShapeErrors) {
    nn::NetworkSpec spec{{2, 3, 1}, nn::Activation::Tanh, {}};
    EXPECT_THROW(nn::forward(nn::ParamVector::Zero(spec.num_params()), spec, Eigen::VectorXd::Zero(3)),
                 std::invalid_argument);
    EXPECT_THROW(nn::forward(nn::ParamVector::Zero(2), spec, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    EXPECT_THROW((nn::NetworkSpec{{2, 0, 1}, nn::Activation::Tanh, {}}).validate(), std::invalid_argument);
    EXPECT_THROW((nn::NetworkSpec{{2, 1}, nn::Activation::Tanh, {{"x", 0, 2}}}).validate(), std::invalid_argument);
    EXPECT_THROW(nn::parse_activation("gelu"), std::invalid_argument);
}

TEST(Network, SimpleGradients) {
    nn::ParamVector p = nn::ParamVector::Constant(1, 3.0);
    auto g = nn::gradient([](ad::Tape&, const ad::Var& th) { return ad::sum(th * th); }, p);
    EXPECT_DOUBLE_EQ(g[0], 6.0);
    p[0] = 0.0;
    g = nn::gradient([](ad::Tape&, const ad::Var& th) { return ad::sum(ad::softplus(th)); }, p);
    EXPECT_DOUBLE_EQ(g[0], 0.5);
}

TEST(Network, RandomNetworksMatchFiniteDifferences) {
    std::mt19937_64 g(21);
    std::uniform_int_distribution<int> wd(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto act = trial % 2 ? nn::Activation::Tanh : nn::Activation::Relu;
        nn::NetworkSpec spec{{wd(g), wd(g), wd(g), wd(g)}, act, {}};
        nn::ParamVector p = nn::init_params(spec, 1.0, 100 + trial);
        ad::Array x = ad::Array::Random(3, spec.input_width());
        ad::Array target = ad::Array::Random(3, spec.output_width());
        auto loss = [&](ad::Tape& t, const std::vector<ad::Var>& v) {
            ad::Var y = nn::forward(v[0], 0, spec, t.constant(x));
            return ad::sum(ad::square(y - t.constant(target)));
        };
        testing_util::expect_gradients_match(loss, {ad::Array(p)}, 1e-6, 1e-5);
    }
}

TEST(InitParams, DeterministicAndBounded) {
    nn::NetworkSpec spec{{5, 8, 2}, nn::Activation::Tanh, {}};
    auto a = nn::init_params(spec, 1e-2, 7), b = nn::init_params(spec, 1e-2, 7), c = nn::init_params(spec, 1e-2, 8);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_LE(a.cwiseAbs().maxCoeff(), 1e-2);
    EXPECT_GT(a.cwiseAbs().maxCoeff(), 5e-3);
    EXPECT_THROW(nn::init_params(spec, 0.0, 1), std::invalid_argument);
}

TEST(Adam, ZeroGradientIsFixedPoint) {
    nn::AdamState s(3, {});
    Eigen::VectorXd p(3);
    p << 1, -2, 3;
    const Eigen::VectorXd before = p;
    nn::adam_step(s, p, Eigen::VectorXd::Zero(3));
    EXPECT_EQ(p, before);
    EXPECT_EQ(s.step, 1);
}

TEST(Adam, FirstStepMagnitude) {
    nn::AdamState s(2, {1e-4, 0.9, 0.999, 1e-12});
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 1.0, -2.0;
    nn::adam_step(s, p, g);
    EXPECT_NEAR(p[0], -1e-4, 1e-15);
    EXPECT_NEAR(p[1], 1e-4, 1e-15);
}

TEST(Adam, RejectsBadGradients) {
    nn::AdamState s(2, {});
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 1.0, std::nan("");
    EXPECT_THROW(nn::adam_step(s, p, g), std::domain_error);
    EXPECT_EQ(s.step, 0);
    EXPECT_THROW(nn::adam_step(s, p, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Adam, MinimisesQuadratic) {
    nn::AdamState s(2, {0.05, 0.9, 0.999, 1e-12});
    Eigen::VectorXd p(2);
    p << 3.0, -4.0;
    for (int i = 0; i < 2000; ++i) nn::adam_step(s, p, 2.0 * p);
    EXPECT_LT(p.norm(), 1e-2);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    const auto path = (std::filesystem::temp_directory_path() / "hh_ckpt_roundtrip.bin").string();
    nn::Checkpoint c;
    c.seed = 42;
    c.activation = nn::Activation::Relu;
    c.widths = {{3, 4, 2}, {5, 4, 3}};
    c.params = nn::init_params(26 + 39, 1.0, 3);
    c.params[0] = -0.0;
    c.params[1] = 1e-310;
    nn::save_checkpoint(path, c);
    auto d = nn::load_checkpoint(path);
    EXPECT_EQ(d.seed, 42u);
    EXPECT_EQ(d.activation, nn::Activation::Relu);
    EXPECT_EQ(d.widths, c.widths);
    ASSERT_EQ(d.params.size(), c.params.size());
    EXPECT_EQ(std::memcmp(d.params.data(), c.params.data(), sizeof(double) * c.params.size()), 0);
    EXPECT_NO_THROW(nn::check_compatible(d, c.widths, nn::Activation::Relu));
    std::filesystem::remove(path);
}

TEST(Checkpoint, MismatchNamesBothShapes) {
    nn::Checkpoint c;
    c.widths = {{3, 4, 2}};
    c.params = Eigen::VectorXd::Zero(26);
    try {
        nn::check_compatible(c, {{3, 8, 2}}, nn::Activation::Tanh);
        FAIL();
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[3x4x2]"), std::string::npos);
        EXPECT_NE(msg.find("[3x8x2]"), std::string::npos);
    }
}

TEST(Checkpoint, RejectsGarbage) {
    const auto path = (std::filesystem::temp_directory_path() / "hh_ckpt_garbage.bin").string();
    {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        std::fputs("not a checkpoint", f);
        std::fclose(f);
    }
    EXPECT_THROW(nn::load_checkpoint(path), std::runtime_error);
    EXPECT_THROW(nn::load_checkpoint(path + ".missing"), std::runtime_error);
    std::filesystem::remove(path);
}
