#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "klein/scattering.hpp"

#include <cmath>
#include <random>

using namespace klein;

namespace {

const StepParameters steps{};

double solve_T(CaseTag c, double E, double p) { return match_solve(kinematics(c, E, p, steps)).T; }

} // namespace

TEST_CASE("symmetric point of the single step")
{
	// T = (E^2 - 1)/E^2 at E = V/2, p = 0
	auto k = kinematics(CaseTag::I, 1.25, 0.0, steps);
	CHECK(std::abs(transmission_closed_form(k) - 0.36) <= 1e-12);
	CHECK(std::abs(match_solve(k).T - 0.36) <= 1e-12);
	CHECK(std::abs(transmission_printed_form(k) - 0.36) <= 1e-12);
}

TEST_CASE("frozen two-step values")
{
	CHECK(transmission(CaseTag::II, 1.1, 0.0, steps) == doctest::Approx(0.4153870613688943).epsilon(1e-12));
	CHECK(transmission(CaseTag::II, 1.2, 0.0, steps) == doctest::Approx(0.23891086270969075).epsilon(1e-12));
	CHECK(transmission(CaseTag::II, 1.3, 0.0, steps) == doctest::Approx(0.09796068463277374).epsilon(1e-12));
	CHECK(transmission(CaseTag::III, 1.2, 0.6, steps) == doctest::Approx(0.5924498172578662).epsilon(1e-12));
	CHECK(solve_T(CaseTag::II, 1.2, 0.0) == doctest::Approx(0.23891086270969075).epsilon(1e-10));
}

TEST_CASE("Klein windows")
{
	auto w1 = klein_window(CaseTag::I, 0.0, steps);
	CHECK(w1.lo == doctest::Approx(1.0).epsilon(1e-12));
	CHECK(w1.hi == doctest::Approx(1.5).epsilon(1e-12));
	auto w2 = klein_window(CaseTag::II, 0.0, steps);
	CHECK(w2.lo == doctest::Approx(1.0).epsilon(1e-12));
	CHECK(w2.hi == doctest::Approx(2.5 - std::sqrt(1.36)).epsilon(1e-12));
	// the incoming side carries p = 0.6 before the vector step
	auto w3 = klein_window(CaseTag::III, 0.6, steps);
	CHECK(w3.lo == doctest::Approx(std::sqrt(1.36)).epsilon(1e-12));
	CHECK(w3.hi == doctest::Approx(1.5).epsilon(1e-12));
	CHECK(klein_window(CaseTag::I, 0.8, steps).empty());
}

TEST_CASE("closed forms agree with the linear solve and conserve flux")
{
	std::mt19937_64 rng(7);
	for(CaseTag c : {CaseTag::I, CaseTag::II, CaseTag::III}) {
		CAPTURE(to_string(c));
		for(double p : {-0.5, -0.2, 0.0, 0.3, 0.6}) {
			auto w = klein_window(c, p, steps);
			if(w.empty()) continue;
			std::uniform_real_distribution<double> U(w.lo, w.hi);
			for(int i = 0; i < 40; ++i) {
				double E = U(rng);
				auto kin = kinematics(c, E, p, steps);
				auto sol = match_solve(kin);
				CHECK(std::abs(sol.T - transmission_closed_form(kin)) <= 1e-10);
				CHECK(std::abs(sol.R + sol.T - 1) <= 1e-10);
			}
		}
	}
}

TEST_CASE("single-step reflection symmetry")
{
	for(double E = 1.01; E < 1.5; E += 0.037) {
		CHECK(std::abs(transmission(CaseTag::I, E, 0.0, steps) - transmission(CaseTag::I, 2.5 - E, 0.0, steps)) <=
		      1e-12);
	}
}

TEST_CASE("coefficient sets map onto each other under E2 -> -E2")
{
	auto kin = kinematics(CaseTag::II, 1.15, 0.2, steps);
	auto flipped = kin;
	flipped.E_2 = -kin.E_2;
	auto a = cavity_coefficients(CaseTag::III, kin);
	auto b = cavity_coefficients(CaseTag::II, flipped);
	CHECK(std::abs(a.X_re - b.X_re) < 1e-14);
	CHECK(std::abs(a.X_im - b.X_im) < 1e-14);
	CHECK(std::abs(a.Y_re - b.Y_re) < 1e-13);
	CHECK(std::abs(a.Y_im - b.Y_im) < 1e-13);
}

TEST_CASE("outside the window nothing propagates into the step")
{
	CHECK(transmission(CaseTag::I, 0.99, 0.0, steps) == 0.0);
	CHECK(transmission(CaseTag::I, 1.51, 0.0, steps) == 0.0);
	auto sol = match_solve(kinematics(CaseTag::I, 1.7, 0.0, steps));
	CHECK(sol.T == doctest::Approx(0.0).epsilon(1e-12));
	CHECK(sol.R == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("perpendicular momentum branch")
{
	auto k = perp_momentum(0.5, 0.0);
	CHECK(k.imag() > 0);
	CHECK(std::abs(k.real()) < 1e-15);
	CHECK(perp_momentum(2.0, 1.0).real() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("channel rates")
{
	double g = channel_rate(CaseTag::I, 0.0, steps);
	// (2/pi) * integral of T; the integral is 0.14608... at p = 0
	CHECK(g * std::numbers::pi / 2 == doctest::Approx(0.146084).epsilon(1e-4));
	// reference integral from 30-digit quadrature of the single-step closed form
	CHECK(std::abs(g - 0.09300045660313281) < 1e-13);
	CHECK(std::abs(channel_rate(CaseTag::II, 0.0, steps) - 0.059579691172461625) < 1e-12);
	CHECK(channel_rate(CaseTag::I, 0.0, steps) / channel_rate(CaseTag::II, 0.0, steps) ==
	      doctest::Approx(1.56094224).epsilon(1e-8));
	CHECK(channel_rate(CaseTag::I, 0.8, steps) == 0.0);
	// even in p for the single step
	CHECK(channel_rate(CaseTag::I, 0.3, steps) == doctest::Approx(channel_rate(CaseTag::I, -0.3, steps)));
	CHECK(total_rate(CaseTag::I, {0.0}, 2.0, steps) == doctest::Approx(2 * g));
}

TEST_CASE("rate ratios")
{
	std::vector<double> ps;
	for(int i = 0; i <= 600; ++i) ps.push_back(-1.5 + 3.0 * i / 600);
	double g1 = total_rate(CaseTag::I, ps, 1.0, steps);
	double g2 = total_rate(CaseTag::II, ps, 1.0, steps);
	double g3 = total_rate(CaseTag::III, ps, 1.0, steps);
	CHECK(g1 / g2 == doctest::Approx(1.745).epsilon(5e-3));
	CHECK(g2 / g3 == doctest::Approx(0.9906).epsilon(5e-3));
}

TEST_CASE("Hund spectrum")
{
	std::vector<double> e = {0.9, 1.25, 1.6};
	auto rho = hund_spectrum(CaseTag::I, 0.0, 10.0, e, steps);
	CHECK(rho[0] == 0.0);
	CHECK(rho[2] == 0.0);
	CHECK(rho[1] == doctest::Approx(20 / std::numbers::pi * 0.36));
}

TEST_CASE("cavity resonances")
{
	CHECK(resonance_energies(CaseTag::I, 0.0, steps).empty());
	auto r = resonance_energies(CaseTag::II, 0.0, steps);
	REQUIRE_FALSE(r.empty());
	auto w = klein_window(CaseTag::II, 0.0, steps);
	for(double E : r) {
		CHECK(E > w.hi);
		auto kin = kinematics(CaseTag::II, E, 0.0, steps);
		double n = kin.eta.real() / std::numbers::pi;
		CHECK(std::abs(n - std::round(n)) < 1e-8);
	}
}

TEST_CASE("solution carries its conditioning")
{
	auto sol = match_solve(kinematics(CaseTag::II, 1.2, 0.0, steps));
	CHECK(std::isfinite(sol.condition));
	CHECK(sol.condition >= 1.0);
	CHECK(sol.condition < 1e14);
}
