#include <doctest.h>

#include <cmath>
#include <cstring>

#include "clockforge/estimation.hpp"
#include "clockforge/protocol.hpp"
#include "clockforge/rng.hpp"

using namespace clockforge;

namespace {

ProtocolSpec css_as_variational(int n_atoms, EstimatorKind est) {
    // [0,0] with n-rotation identity and the S_y measurement frame.
    return ProtocolSpec::variational(n_atoms, 0, 0, {0.0, 0.0, kPi / 2, kPi / 2}, est);
}

}  // namespace

TEST_CASE("variational parameter counting") {
    CHECK(ProtocolSpec::variational_param_count(0, 0) == 4);
    CHECK(ProtocolSpec::variational_param_count(1, 0) == 5);
    CHECK(ProtocolSpec::variational_param_count(1, 1) == 8);
    CHECK(ProtocolSpec::variational_param_count(1, 2) == 11);
    CHECK_THROWS_AS(
        ProtocolSpec::variational(4, 1, 1, {0.1, 0.2, 0.3}, EstimatorKind::OptimalBayes),
        InvalidArgument);
}

TEST_CASE("variational [0,0] recovers the CSS") {
    const int n = 6;
    const StateVector a = prepare_state(ProtocolSpec::css(n));
    const StateVector b = prepare_state(css_as_variational(n, EstimatorKind::Linear));
    CHECK(std::abs(a.amplitudes.dot(b.amplitudes)) == doctest::Approx(1.0).epsilon(1e-12));

    const PriorModel prior = gaussian_prior(0.3);
    const ConditionalModel ma = statistical_model(ProtocolSpec::css(n), prior);
    const ConditionalModel mb =
        statistical_model(css_as_variational(n, EstimatorKind::Linear), prior);
    CHECK((ma.probs - mb.probs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("SSS with zero twist is the CSS") {
    const StateVector a = prepare_state(ProtocolSpec::css(5));
    const StateVector b = prepare_state(ProtocolSpec::sss(5, 0.0));
    CHECK(std::abs(a.amplitudes.dot(b.amplitudes)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("GHZ state at N = 2") {
    const StateVector ghz = prepare_state(ProtocolSpec::ghz(2));
    CHECK(std::norm(ghz.amplitudes(0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::norm(ghz.amplitudes(2)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(ghz.amplitudes(1)) < 1e-14);
}

TEST_CASE("single-atom CSS statistical model is (1 +- sin phi)/2") {
    const PriorModel prior = gaussian_prior(0.4);
    const ConditionalModel model = statistical_model(ProtocolSpec::css(1), prior);
    REQUIRE(model.outcomes.size() == 2);
    CHECK(model.outcomes[0] == doctest::Approx(-0.5));
    for (int q = 0; q < prior.n_nodes(); q += 17) {
        const double phi = prior.nodes[q];
        CHECK(model.probs(0, q) == doctest::Approx(0.5 * (1 - std::sin(phi))).epsilon(1e-12));
        CHECK(model.probs(1, q) == doctest::Approx(0.5 * (1 + std::sin(phi))).epsilon(1e-12));
    }
}

TEST_CASE("model columns are normalized and derivatives are analytic") {
    const PriorModel prior = gaussian_prior(0.5);
    Rng rng(3);
    std::vector<double> params(ProtocolSpec::variational_param_count(1, 1));
    for (auto& p : params) p = 2.0 * rng.uniform01() - 1.0;
    const ProtocolSpec spec =
        ProtocolSpec::variational(5, 1, 1, params, EstimatorKind::OptimalBayes);
    const ConditionalModel model = statistical_model(spec, prior);
    for (int q = 0; q < prior.n_nodes(); ++q) {
        double sum = 0, dsum = 0;
        for (int x = 0; x < static_cast<int>(model.outcomes.size()); ++x) {
            sum += model.probs(x, q);
            dsum += model.dprobs(x, q);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(dsum) < 1e-10);
    }
    // Analytic derivative against a central difference in phi.
    const double h = 1e-6;
    for (const int q : {10, 100, 150}) {
        PriorModel plus = prior, minus = prior;
        plus.nodes[q] += h;
        minus.nodes[q] -= h;
        const ConditionalModel mp = statistical_model(spec, plus);
        const ConditionalModel mm = statistical_model(spec, minus);
        for (int x = 0; x < static_cast<int>(model.outcomes.size()); ++x) {
            const double fd = (mp.probs(x, q) - mm.probs(x, q)) / (2 * h);
            CHECK(model.dprobs(x, q) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("GHZ parity expectation is (-1)^N sin(N phi)") {
    for (const int n : {2, 3, 4, 7}) {
        const PriorModel prior = gaussian_prior(0.2);
        const ConditionalModel parity = statistical_model(ProtocolSpec::ghz(n, true), prior);
        REQUIRE(parity.outcomes.size() == 2);
        for (int q = 0; q < prior.n_nodes(); q += 23) {
            const double phi = prior.nodes[q];
            const double mean = parity.outcomes[0] * parity.probs(0, q) +
                                parity.outcomes[1] * parity.probs(1, q);
            const double expected = ((n % 2 == 0) ? 1.0 : -1.0) * std::sin(n * phi);
            CHECK(mean == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("oat period: model invariant under mu -> mu + 4 pi") {
    const PriorModel prior = gaussian_prior(0.3);
    for (const int n : {3, 4}) {
        std::vector<double> params = {0.37, 0.0, 0.0, kPi / 2, kPi / 2};
        const auto spec_a =
            ProtocolSpec::variational(n, 1, 0, params, EstimatorKind::OptimalBayes);
        params[0] += 4 * kPi;
        const auto spec_b =
            ProtocolSpec::variational(n, 1, 0, params, EstimatorKind::OptimalBayes);
        const ConditionalModel ma = statistical_model(spec_a, prior);
        const ConditionalModel mb = statistical_model(spec_b, prior);
        CHECK((ma.probs - mb.probs).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("sss moments") {
    SUBCASE("zero twist reduces to CSS values") {
        const SpinMoments m = sss_moments(8, 0.0);
        CHECK(m.ex_sx == doctest::Approx(4.0));
        CHECK(m.ex_sx2 == doctest::Approx(16.0));
        CHECK(m.ex_sy2 == doctest::Approx(2.0));
        CHECK(m.wineland_xi == doctest::Approx(1.0));
    }
    SUBCASE("N = 2, mu = 0 has xi = 1") {
        CHECK(sss_moments(2, 0.0).wineland_xi == doctest::Approx(1.0));
    }
    SUBCASE("closed forms match the spin-core simulation at N = 10, mu = 0.2") {
        const SpinMoments m = sss_moments(10, 0.2);
        const StateVector sss = prepare_state(ProtocolSpec::sss(10, 0.2));
        const CollectiveOps ops = collective_ops(10);
        const SpinOperator sx2{ops.sx.basis, ops.sx.matrix * ops.sx.matrix};
        const SpinOperator sy2{ops.sy.basis, ops.sy.matrix * ops.sy.matrix};
        CHECK(expect(sss, ops.sx) == doctest::Approx(m.ex_sx).epsilon(1e-10));
        CHECK(expect(sss, sx2) == doctest::Approx(m.ex_sx2).epsilon(1e-10));
        CHECK(expect(sss, sy2) == doctest::Approx(m.ex_sy2).epsilon(1e-10));
        CHECK(m.wineland_xi < 1.0);  // squeezed
    }
    SUBCASE("N = 2 edge case (cos^{N-2} exponent zero)") {
        const SpinMoments m = sss_moments(2, 0.4);
        const StateVector sss = prepare_state(ProtocolSpec::sss(2, 0.4));
        const CollectiveOps ops = collective_ops(2);
        const SpinOperator sy2{ops.sy.basis, ops.sy.matrix * ops.sy.matrix};
        CHECK(expect(sss, sy2) == doctest::Approx(m.ex_sy2).epsilon(1e-10));
    }
}

TEST_CASE("analytic effective measurement uncertainties") {
    SUBCASE("CSS tends to the SQL") {
        CHECK(analytic_efm(AnalyticKind::Css, 10, 1e-6) == doctest::Approx(0.1).epsilon(1e-9));
    }
    SUBCASE("CSS at N = 10, delta_phi = 0.3") {
        const double v = 0.09;
        const double expected = std::cosh(v) / 10 + std::sinh(v) - v;
        CHECK(analytic_efm(AnalyticKind::Css, 10, 0.3) == doctest::Approx(expected));
        CHECK(expected == doctest::Approx(0.100527).epsilon(1e-5));
    }
    SUBCASE("GHZ at N = 2, delta_phi = 0.5") {
        CHECK(analytic_efm(AnalyticKind::Ghz, 2, 0.5) ==
              doctest::Approx(std::exp(1.0) / 4 - 0.25).epsilon(1e-12));
        CHECK(analytic_efm(AnalyticKind::Ghz, 2, 0.5) ==
              doctest::Approx(0.429570).epsilon(1e-5));
    }
}

TEST_CASE("phase operator") {
    const PhaseOperatorData pod = phase_operator(2);
    CHECK(pod.eigenvalues[0] == doctest::Approx(-2 * kPi / 3).epsilon(1e-14));
    CHECK(pod.eigenvalues[1] == doctest::Approx(0.0));
    CHECK(pod.eigenvalues[2] == doctest::Approx(2 * kPi / 3).epsilon(1e-14));
    const Eigen::MatrixXcd gram =
        pod.eigenvectors.adjoint() * pod.eigenvectors - Eigen::MatrixXcd::Identity(3, 3);
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-12);

    for (int n = 1; n <= 64; n += 7)
        CHECK(phase_operator(n).sine_state.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("protocol serialization round-trips bit-exactly") {
    Rng rng(17);
    std::vector<double> params(ProtocolSpec::variational_param_count(1, 2));
    for (auto& p : params) p = 4.0 * rng.uniform01() - 2.0;
    const ProtocolSpec spec = ProtocolSpec::variational(9, 1, 2, params, EstimatorKind::Linear);
    const std::string text = protocol_to_json(spec);
    const ProtocolSpec back = protocol_from_json(text);
    CHECK(back.n_atoms == spec.n_atoms);
    CHECK(back.var_n == spec.var_n);
    CHECK(back.var_m == spec.var_m);
    REQUIRE(back.var_params.size() == spec.var_params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
        CHECK(std::memcmp(&back.var_params[i], &spec.var_params[i], sizeof(double)) == 0);
    CHECK(protocol_to_json(back) == text);

    const ProtocolSpec sss = ProtocolSpec::sss(7, 0.1234567890123456789, EstimatorKind::Linear);
    CHECK(protocol_to_json(protocol_from_json(protocol_to_json(sss))) == protocol_to_json(sss));
}

TEST_CASE("model sampler matches statistical model columns") {
    const PriorModel prior = gaussian_prior(0.4);
    for (const auto& spec :
         {ProtocolSpec::css(6, EstimatorKind::OptimalBayes), ProtocolSpec::sss(6, 0.3),
          ProtocolSpec::ghz(6), ProtocolSpec::ghz(5, true), ProtocolSpec::poi(6)}) {
        const ConditionalModel model = statistical_model(spec, prior);
        const ModelSampler sampler(spec);
        std::vector<double> p(sampler.n_out());
        for (int q = 0; q < prior.n_nodes(); q += 31) {
            sampler.probs_at(prior.nodes[q], p.data());
            for (int x = 0; x < sampler.n_out(); ++x)
                CHECK(p[x] == doctest::Approx(model.probs(x, q)).epsilon(1e-11));
        }
    }
}

TEST_CASE("quadrature BMSE is stable under node doubling") {
    for (const double dphi : {0.5, 1.5}) {
        const ProtocolSpec spec = ProtocolSpec::css(8, EstimatorKind::OptimalBayes);
        const double a =
            optimal_bayes_estimate(statistical_model(spec, gaussian_prior(dphi, 201, 8)))
                .second.bmse;
        const double b =
            optimal_bayes_estimate(statistical_model(spec, gaussian_prior(dphi, 401, 8)))
                .second.bmse;
        CHECK(a == doctest::Approx(b).epsilon(1e-6));
    }
}
