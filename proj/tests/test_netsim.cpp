#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "netgain/netsim.hpp"

#include "support.hpp"

using namespace netgain;
using Catch::Approx;

namespace {

NetworkSpec static_rotation_net(double g1 = 0.5, double g2 = 0.5) {
    NetworkSpec net;
    net.subsystems = {{g1, 0.0, 1}, {g2, 0.0, 1}};
    net.a = Matrix{{0, -1}, {1, 0}};
    return net;
}

std::vector<LtiSystem> static_gains(const NetworkSpec& net) {
    std::vector<LtiSystem> out;
    for (const auto& s : net.subsystems)
        out.push_back(LtiSystem::pure_gain(s.gamma * Matrix::identity(s.m)));
    return out;
}

std::vector<Vec> impulse_input(int m, int horizon) {
    std::vector<Vec> v(static_cast<std::size_t>(horizon), Vec(static_cast<std::size_t>(m), 0.0));
    v[0][0] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("l2_gain", "[netsim]") {
    SECTION("one-pole lag peaks at dc") {
        const auto [gamma, beta] = l2_gain(LtiSystem::one_pole(0.5, 0.5), 512);
        CHECK(gamma == Approx(1.0).margin(1e-3));
        CHECK(beta == 0.0);
    }
    SECTION("static gain") {
        const auto [gamma, beta] = l2_gain(LtiSystem::pure_gain(Matrix{{0.7}}), 512);
        CHECK(gamma == Approx(0.7).margin(1e-12));
    }
    SECTION("unit delay is all-pass") {
        const LtiSystem delay{Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}};
        const auto [gamma, beta] = l2_gain(delay, 512);
        CHECK(gamma == Approx(1.0).margin(1e-9));
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(l2_gain(LtiSystem::one_pole(0.5, 0.5), 256), InvalidInputError);
        CHECK_THROWS_AS(l2_gain(LtiSystem::one_pole(1.5, 0.5), 512), UnstableSubsystemError);
    }
}

TEST_CASE("static loop simulation matches the closed form", "[netsim]") {
    const NetworkSpec net = static_rotation_net();
    const auto reals = static_gains(net);

    // y = (I - Gamma A)^{-1} Gamma v = 0.4 [[1, -0.5], [0.5, 1]] v
    const Matrix closed = 0.4 * Matrix{{1, -0.5}, {0.5, 1}};

    testsupport::Rng rng(103);
    std::vector<Vec> v;
    for (int k = 0; k < 16; ++k) v.push_back(testsupport::random_vec(rng, 2));
    const SignalLog log = simulate(net, reals, v, 16);
    for (int k = 0; k < 16; ++k) {
        const Vec want = closed * v[static_cast<std::size_t>(k)];
        CHECK(std::fabs(log.y[static_cast<std::size_t>(k)][0] - want[0]) < 1e-10);
        CHECK(std::fabs(log.y[static_cast<std::size_t>(k)][1] - want[1]) < 1e-10);
    }

    // impulse response: ||y|| / ||v|| = 0.4 sqrt(1.25)
    const SignalLog imp = simulate(net, reals, impulse_input(2, 8), 8);
    CHECK(imp.norm_y.back() / imp.norm_v.back() == Approx(0.4 * std::sqrt(1.25)).epsilon(1e-12));
}

TEST_CASE("decoupled network reproduces isolated responses", "[netsim]") {
    NetworkSpec net;
    net.subsystems = {{1.0, 0.0, 1}, {1.0, 0.0, 1}};
    net.a = Matrix(2, 2);
    std::vector<LtiSystem> reals = {LtiSystem::one_pole(0.5, 1.0), LtiSystem::one_pole(0.3, 1.0)};

    std::vector<Vec> v(8, Vec{0.0, 0.0});
    v[0] = Vec{1.0, 1.0};
    const SignalLog log = simulate(net, reals, v, 8);
    // isolated one-pole impulse responses: y(k) = b a^{k-1} for k >= 1
    for (int k = 1; k < 8; ++k) {
        CHECK(log.y[static_cast<std::size_t>(k)][0] == Approx(std::pow(0.5, k - 1)).epsilon(1e-12));
        CHECK(log.y[static_cast<std::size_t>(k)][1] == Approx(std::pow(0.3, k - 1)).epsilon(1e-12));
    }
}

TEST_CASE("simulation linearity and norm monotonicity", "[netsim][property]") {
    testsupport::Rng rng(107);
    NetworkSpec net;
    net.subsystems = {{0.6, 0.0, 1}, {0.6, 0.0, 1}};
    net.a = Matrix{{0, -1}, {1, 0}};
    std::vector<LtiSystem> reals = {LtiSystem::one_pole(0.4, 0.36), LtiSystem::one_pole(0.4, 0.36)};

    std::vector<Vec> v, v3;
    for (int k = 0; k < 32; ++k) {
        v.push_back(testsupport::random_vec(rng, 2));
        v3.push_back(Vec{3.0 * v.back()[0], 3.0 * v.back()[1]});
    }
    const SignalLog a = simulate(net, reals, v, 32);
    const SignalLog b = simulate(net, reals, v3, 32);
    for (int k = 0; k < 32; ++k) {
        CHECK(std::fabs(b.y[static_cast<std::size_t>(k)][0] - 3.0 * a.y[static_cast<std::size_t>(k)][0]) <
              1e-9 * std::max(1.0, std::fabs(b.y[static_cast<std::size_t>(k)][0])));
        if (k) {
            CHECK(a.norm_v[static_cast<std::size_t>(k)] >= a.norm_v[static_cast<std::size_t>(k - 1)]);
            CHECK(a.norm_y[static_cast<std::size_t>(k)] >= a.norm_y[static_cast<std::size_t>(k - 1)]);
        }
    }
}

TEST_CASE("singular static loop is rejected", "[netsim]") {
    NetworkSpec net;
    net.subsystems = {{1.0, 0.0, 1}, {1.0, 0.0, 1}};
    net.a = Matrix{{0, 1}, {1, 0}};
    const auto reals = static_gains(net);  // I - J A = [[1,-1],[-1,1]] singular
    CHECK_THROWS_AS(simulate(net, reals, impulse_input(2, 4), 4), NotWellPosedError);
}

TEST_CASE("simulate validates shapes", "[netsim]") {
    NetworkSpec net = static_rotation_net();
    const auto reals = static_gains(net);
    CHECK_THROWS_AS(simulate(net, {reals[0]}, impulse_input(2, 4), 4), DimensionError);
    CHECK_THROWS_AS(simulate(net, reals, impulse_input(1, 4), 4), DimensionError);
    CHECK_THROWS_AS(simulate(net, reals, impulse_input(2, 2), 4), DimensionError);
    std::vector<LtiSystem> wide = {LtiSystem::pure_gain(Matrix::identity(2)),
                                   LtiSystem::pure_gain(Matrix{{0.5}})};
    CHECK_THROWS_AS(simulate(net, wide, impulse_input(2, 4), 4), DimensionError);
}

TEST_CASE("empirical bound check on the static rotation loop", "[netsim]") {
    const NetworkSpec net = static_rotation_net();
    const auto reals = static_gains(net);
    const auto bound = verify_network(net);
    REQUIRE(bound.has_value());

    const EmpiricalReport rep = empirical_bound_check(net, reals, *bound, 10, 64, 12345);
    CHECK(rep.violations == 0);
    CHECK(rep.trials == 12);  // requested randoms plus impulse and worst-direction
    CHECK(rep.max_ratio == Approx(0.4 * std::sqrt(1.25)).epsilon(1e-9));
    CHECK(rep.max_ratio <= bound->rho);
}

TEST_CASE("declared gain below the realization is rejected", "[netsim]") {
    NetworkSpec net = static_rotation_net(0.4, 0.5);  // realized gain is 0.5 on both channels
    const std::vector<LtiSystem> reals = {LtiSystem::pure_gain(Matrix{{0.5}}),
                                          LtiSystem::pure_gain(Matrix{{0.5}})};
    GainBound dummy;
    dummy.rho = 1.0;
    CHECK_THROWS_AS(empirical_bound_check(net, reals, dummy, 1, 8, 0), ConfigurationError);
}

TEST_CASE("decoupled bound: ratio never exceeds the largest gain", "[netsim]") {
    NetworkSpec net;
    net.subsystems = {{0.8, 0.0, 1}, {0.3, 0.0, 1}};
    net.a = Matrix(2, 2);
    const auto reals = static_gains(net);
    const auto bound = verify_network(net);
    REQUIRE(bound.has_value());
    const EmpiricalReport rep = empirical_bound_check(net, reals, *bound, 8, 32, 7);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio <= 0.8 + 1e-12);
}

TEST_CASE("initial state bias from the observability gramian", "[netsim]") {
    const LtiSystem sys = LtiSystem::one_pole(0.5, 0.5);
    // W solves a^2 w - w = -h^2, so w = 1/(1 - 0.25) and beta = |x0| sqrt(w)
    const double beta = initial_state_bias(sys, Vec{2.0});
    CHECK(beta == Approx(2.0 / std::sqrt(0.75)).epsilon(1e-10));

    // free response from x0: ||y||_T grows toward beta and never exceeds it
    NetworkSpec net;
    net.subsystems = {{1.0, 0.0, 1}};
    net.a = Matrix(1, 1);
    const std::vector<Vec> zero(64, Vec{0.0});
    const SignalLog log = simulate(net, {sys}, zero, 64, Tolerances::defaults(), Vec{2.0});
    CHECK(log.norm_y.back() <= beta + 1e-9);
    CHECK(log.norm_y.back() == Approx(beta).epsilon(1e-6));
}
