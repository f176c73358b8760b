#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "klein/dirac.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace klein;

namespace {

Config small(CaseTag c) { return testing_support::natural_config(c, 128, 40, 10); }

Hamiltonian make(CaseTag c, double p, int spin = 1)
{
	auto cfg = small(c);
	return build_hamiltonian(cfg.grid, Channel{p, spin}, cfg.fields);
}

Hamiltonian free_hamiltonian(double p)
{
	auto cfg = small(CaseTag::I);
	GridPotentials zero{std::vector<double>(128, 0.0), std::vector<double>(128, 0.0)};
	return Hamiltonian(cfg.grid, Channel{p, 1}, zero);
}

SpinorField random_state(std::int64_t dim, unsigned seed)
{
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> g;
	SpinorField v(dim);
	for(auto& z : v) z = {g(rng), g(rng)};
	return v / v.norm();
}

} // namespace

TEST_CASE("free basis")
{
	auto cfg = small(CaseTag::I);
	auto b = build_free_basis(cfg.grid, Channel{0.6, 1});
	auto P = b.positive_states();
	auto N = b.negative_states();
	const auto n = cfg.grid.n_points;
	Eigen::MatrixXcd all(2 * n, 2 * n);
	all << P, N;
	CHECK(gram_residual(all) <= 1e-12);
	Eigen::MatrixXcd proj = P * P.adjoint() + N * N.adjoint();
	CHECK((proj - Eigen::MatrixXcd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() <= 1e-12);
	CHECK((P.adjoint() * N).cwiseAbs().maxCoeff() <= 1e-12);

	auto zero = std::find(b.k.begin(), b.k.end(), 0.0) - b.k.begin();
	CHECK(b.energy[zero] == doctest::Approx(std::sqrt(1.36)).epsilon(1e-15));
	auto b0 = build_free_basis(cfg.grid, Channel{0.0, 1});
	CHECK(b0.energy[zero] == 1.0);

	// dispersion: H0 P = P diag(E), H0 N = -N diag(E)
	auto H0 = free_hamiltonian(0.6).dense();
	Eigen::VectorXd E = Eigen::Map<const Eigen::VectorXd>(b.energy.data(), n);
	CHECK((H0 * P - P * E.asDiagonal()).cwiseAbs().maxCoeff() <= 1e-12);
	CHECK((H0 * N + N * E.asDiagonal()).cwiseAbs().maxCoeff() <= 1e-12);

	auto order = b.ascending_order();
	for(std::size_t i = 1; i < order.size(); ++i) CHECK(b.k[order[i]] > b.k[order[i - 1]]);
}

TEST_CASE("free limit of the spectrum")
{
	auto H = free_hamiltonian(0.3);
	auto s = diagonalize(H.dense());
	std::vector<double> expect;
	for(double k : H.k()) {
		double e = std::sqrt(1 + k * k + 0.09);
		expect.push_back(e);
		expect.push_back(-e);
	}
	std::sort(expect.begin(), expect.end());
	for(std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(s.energies[i] - expect[i]) <= 1e-10);
}

TEST_CASE("Hamiltonian consistency")
{
	for(CaseTag c : {CaseTag::I, CaseTag::II, CaseTag::III}) {
		CAPTURE(to_string(c));
		auto H = make(c, 0.3);
		auto D = H.dense();
		CHECK(hermiticity_residual(D) <= 1e-12);
		auto v = random_state(H.dim(), 3);
		CHECK((D * v - H.apply(v)).cwiseAbs().maxCoeff() <= 1e-12);
		auto s = diagonalize(D);
		CHECK(reconstruction_residual(D, s) <= 1e-9);
		CHECK(gram_residual(s.vectors) <= 1e-10);
		for(Eigen::Index i = 1; i < s.energies.size(); ++i) CHECK(s.energies[i] >= s.energies[i - 1]);
	}
}

TEST_CASE("spin labels decouple")
{
	for(CaseTag c : {CaseTag::I, CaseTag::II}) {
		auto up = make(c, 0.4, 1).dense();
		auto dn = make(c, 0.4, -1).dense();
		CHECK((up - dn).cwiseAbs().maxCoeff() == 0.0);
	}
}

TEST_CASE("cutoff guard")
{
	auto cfg = testing_support::natural_config(CaseTag::I, 32, 40, 10);
	CHECK_THROWS_AS(build_hamiltonian(cfg.grid, Channel{0.0, 1}, cfg.fields), ConfigError);
}

TEST_CASE("static continua")
{
	auto f1 = small(CaseTag::I).fields;
	auto c1 = static_continua(f1, Channel{0.0, 1}, {-100.0, 100.0});
	CHECK(c1.upper[0] == doctest::Approx(1.0));
	CHECK(c1.lower[0] == doctest::Approx(-1.0));
	CHECK(c1.lower[1] == doctest::Approx(1.5));
	CHECK(c1.upper[1] == doctest::Approx(3.5));
	auto f2 = small(CaseTag::II).fields;
	auto c2 = static_continua(f2, Channel{0.0, 1}, {100.0});
	CHECK(c2.lower[0] == doctest::Approx(2.5 - std::sqrt(1.36)));
}

TEST_CASE("charge-conjugation symmetry of the single step")
{
	// x -> -x together with v -> V - v(-x) maps the closed single-step profile onto itself,
	// so at p = 0 the spectrum is symmetric about V/2
	auto s = diagonalize(make(CaseTag::I, 0.0).dense());
	const auto n = s.energies.size();
	double worst = 0;
	for(Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(s.energies[i] + s.energies[n - 1 - i] - 2.5));
	CHECK(worst <= 1e-9);
}

TEST_CASE("eigen propagation")
{
	auto H = make(CaseTag::I, 0.2);
	auto D = H.dense();
	auto s = diagonalize(D);
	auto psi = random_state(H.dim(), 5);
	CHECK((evolve_eigen(s, psi, 0.0) - psi).norm() <= 1e-13);
	SpinorField m = s.vectors.col(17);
	auto out = evolve_eigen(s, m, 3.0);
	CHECK((out - std::exp(cplx(0, -s.energies[17] * 3.0)) * m).norm() <= 1e-12);
	auto late = evolve_eigen(s, psi, 100.0);
	CHECK(std::abs(late.norm() - 1) <= 1e-10);
	double e0 = (psi.adjoint() * D * psi)(0).real();
	double e1 = (late.adjoint() * D * late)(0).real();
	CHECK(std::abs(e1 - e0) <= 1e-9 * std::abs(e0));
}

TEST_CASE("split operator: free limit is exact")
{
	auto H = free_hamiltonian(0.5);
	auto s = diagonalize(H.dense());
	auto psi = random_state(H.dim(), 11);
	auto a = evolve_split_operator(H, psi, 0.02, 150);
	auto b = evolve_eigen(s, psi, 3.0);
	CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("split operator: unitarity and second order")
{
	auto H = make(CaseTag::I, 0.0);
	auto s = diagonalize(H.dense());
	auto psi = random_state(H.dim(), 13);
	auto one = evolve_split_operator(H, psi, 0.02, 1);
	CHECK(std::abs(one.norm() - 1) <= 1e-13);

	auto exact = evolve_eigen(s, psi, 2.0);
	double e1 = (evolve_split_operator(H, psi, 0.02, 100) - exact).cwiseAbs().maxCoeff();
	double e2 = (evolve_split_operator(H, psi, 0.01, 200) - exact).cwiseAbs().maxCoeff();
	double e3 = (evolve_split_operator(H, psi, 0.005, 400) - exact).cwiseAbs().maxCoeff();
	CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.125));
	CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("split operator: step-size guard")
{
	auto H = make(CaseTag::I, 0.0);
	auto psi = random_state(H.dim(), 1);
	double too_big = 0.6 / H.energy_scale();
	CHECK_THROWS_AS(evolve_split_operator(H, psi, too_big, 1), std::invalid_argument);
	CHECK_NOTHROW(evolve_split_operator(H, psi, 0.4 / H.energy_scale(), 1));
}
