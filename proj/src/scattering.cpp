#include "klein/scattering.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace klein {

namespace {

constexpr double pi = std::numbers::pi;

struct Region
{
	double v;     // scalar potential
	double P;     // kinetic parallel momentum
	double left;  // boundaries; +-inf for the outer regions
	double right;
};

std::vector<Region> layout(CaseTag c, double p, const StepParameters& s)
{
	const double inf = std::numeric_limits<double>::infinity();
	switch(c) {
	case CaseTag::I: return {{0, p, -inf, 0}, {s.V, p, 0, inf}};
	case CaseTag::II: return {{0, p, -inf, 0}, {s.V, p, 0, s.L}, {s.V, p - s.delta, s.L, inf}};
	case CaseTag::III: return {{0, p, -inf, -s.L}, {0, p - s.delta, -s.L, 0}, {s.V, p - s.delta, 0, inf}};
	}
	return {};
}

using Vec2 = Eigen::Vector2cd;

Vec2 spinor(double eps, cplx q, double P)
{
	if(eps > 0) return {eps + 1, q + cplx(0, P)};
	return {q - cplx(0, P), eps - 1};
}

double current(const Vec2& s) { return 2 * std::real(std::conj(s(0)) * s(1)); }

bool propagating(cplx q) { return std::abs(q.imag()) <= 1e-14 * std::max(1.0, std::abs(q.real())); }

// sin(q L)/q with the q -> 0 limit
cplx sinc_len(cplx q, double L)
{
	if(std::abs(q) * L < 1e-6) return L * (1.0 - q * q * L * L / 6.0);
	return std::sin(q * L) / q;
}

} // namespace

StepParameters StepParameters::from(const FieldConfiguration& in)
{
	auto f = to_natural_units(in);
	StepParameters s;
	s.V = f.e_phi0;
	s.delta = f.case_tag == CaseTag::I ? 0.0 : f.delta();
	s.L = f.L;
	return s;
}

cplx perp_momentum(double E, double p_parallel)
{
	cplx q = std::sqrt(cplx(E * E - 1 - p_parallel * p_parallel, 0.0));
	if(q.imag() < 0) q = -q;
	return q;
}

RegionKinematics kinematics(CaseTag c, double E_i, double p, const StepParameters& s)
{
	RegionKinematics k;
	k.case_tag = c;
	k.E_i = E_i;
	k.p_i = p;
	switch(c) {
	case CaseTag::I:
		k.E_f = s.V - E_i;
		k.p_f = p;
		break;
	case CaseTag::II:
		k.E_2 = s.V - E_i;
		k.p_2 = p;
		k.E_f = k.E_2;
		k.p_f = p - s.delta;
		break;
	case CaseTag::III:
		k.E_2 = E_i;
		k.p_2 = p - s.delta;
		k.E_f = s.V - k.E_2;
		k.p_f = k.p_2;
		break;
	}
	k.k_i = perp_momentum(k.E_i, k.p_i);
	k.k_f = perp_momentum(k.E_f, k.p_f);
	if(c != CaseTag::I) {
		k.k_2 = perp_momentum(k.E_2, k.p_2);
		k.L = s.L;
		k.eta = k.k_2 * s.L;
	}
	return k;
}

EnergyInterval klein_window(CaseTag c, double p, const StepParameters& s)
{
	double pf = c == CaseTag::I ? p : p - s.delta;
	EnergyInterval w{std::sqrt(1 + p * p), s.V - std::sqrt(1 + pf * pf)};
	return w;
}

ScatteringSolution match_solve(const RegionKinematics& kin)
{
	StepParameters s;
	s.L = kin.L;
	const double E = kin.E_i;
	// recover V and delta from the kinematics
	s.V = kin.case_tag == CaseTag::III ? kin.E_f + kin.E_2 : kin.E_f + kin.E_i;
	s.delta = kin.p_i - kin.p_f;
	auto regs = layout(kin.case_tag, kin.p_i, s);
	const int n = static_cast<int>(regs.size());

	if(!propagating(kin.k_i) || kin.k_i.real() <= 0)
		throw std::invalid_argument("match_solve: incoming wave is not propagating");

	std::vector<cplx> q(n);
	for(int j = 0; j < n; ++j) {
		double eps = E - regs[j].v;
		q[j] = perp_momentum(eps, regs[j].P);
		// right-moving branch for propagating waves
		if(propagating(q[j])) {
			q[j] = cplx(std::abs(q[j].real()), 0.0);
			if(current(spinor(eps, q[j], regs[j].P)) < 0) q[j] = -q[j];
		}
	}

	// Amplitudes: region 0 has incoming 1 and r; middle regions A (referenced at left edge) and
	// B (referenced at right edge); last region t referenced at its left edge.
	const int nunk = 2 * (n - 1);
	Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(nunk, nunk);
	Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nunk);
	auto waves = [&](int j, double x) {
		const auto& R = regs[j];
		double eps = E - R.v;
		double refA = std::isfinite(R.left) ? R.left : R.right;
		double refB = std::isfinite(R.right) ? R.right : R.left;
		Vec2 a = spinor(eps, q[j], R.P) * std::exp(cplx(0, 1) * q[j] * (x - refA));
		Vec2 b = spinor(eps, -q[j], R.P) * std::exp(-cplx(0, 1) * q[j] * (x - refB));
		return std::pair{a, b};
	};
	int row = 0;
	for(int j = 1; j < n; ++j) {
		double x = regs[j].left;
		auto [fa, fb] = waves(j - 1, x);
		auto [ga, gb] = waves(j, x);
		for(int c = 0; c < 2; ++c) {
			if(j - 1 == 0) {
				rhs(row + c) -= fa(c);
				M(row + c, 0) += fb(c);
			} else {
				int ia = 2 * (j - 1) - 1;
				M(row + c, ia) += fa(c);
				M(row + c, ia + 1) += fb(c);
			}
			if(j == n - 1) {
				M(row + c, nunk - 1) -= ga(c);
			} else {
				int ia = 2 * j - 1;
				M(row + c, ia) -= ga(c);
				M(row + c, ia + 1) -= gb(c);
			}
		}
		row += 2;
	}

	Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
	const auto& sv = svd.singularValues();
	double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
	if(!(cond < 1e14)) {
		std::ostringstream o;
		o << "match_solve: singular continuity system (condition " << cond << ") at E=" << E << " p=" << kin.p_i;
		throw SingularSystemError(o.str(), cond);
	}
	Eigen::VectorXcd sol = M.fullPivLu().solve(rhs);

	ScatteringSolution out;
	out.kin = kin;
	out.condition = cond;
	out.r = sol(0);
	out.t = sol(nunk - 1);
	if(n == 3) {
		out.c1 = sol(1);
		out.c2 = sol(2);
	}
	const auto& R0 = regs.front();
	const auto& Rf = regs.back();
	double ji = current(spinor(E - R0.v, q.front(), R0.P));
	double jr = -current(spinor(E - R0.v, -q.front(), R0.P)) * std::norm(out.r);
	double jt = propagating(q.back()) ? current(spinor(E - Rf.v, q.back(), Rf.P)) * std::norm(out.t) : 0.0;
	out.T = jt / ji;
	out.R = jr / ji;
	return out;
}

CavityCoefficients cavity_coefficients(CaseTag set, const RegionKinematics& k)
{
	const cplx A = k.E_i + 1, B = k.E_f + 1;
	const cplx ki = k.k_i, kf = k.k_f;
	const double pi_ = k.p_i, p2 = k.p_2, pf = k.p_f, E2 = k.E_2;
	CavityCoefficients c;
	c.X_re = A * B + ki * kf + pi_ * pf;
	c.X_im = -(kf * pi_ - ki * pf);
	if(set == CaseTag::II) {
		c.Y_re = pi_ * (E2 - 1) * B - pf * (E2 + 1) * A + p2 * (A * B - ki * kf - pi_ * pf);
		c.Y_im = ki * B * (E2 - 1) + kf * A * (E2 + 1) + p2 * (kf * pi_ - ki * pf);
	} else {
		c.Y_re = -pi_ * (E2 + 1) * B + pf * (E2 - 1) * A + p2 * (A * B - ki * kf - pi_ * pf);
		c.Y_im = -ki * B * (E2 + 1) - kf * A * (E2 - 1) + p2 * (kf * pi_ - ki * pf);
	}
	return c;
}

double transmission_from_coefficients(const RegionKinematics& k, const CavityCoefficients& cc)
{
	if(!propagating(k.k_i) || !propagating(k.k_f)) return 0.0;
	const cplx s = sinc_len(k.k_2, k.L);
	const cplx c = std::cos(k.k_2 * k.L);
	const cplx a = cc.Y_re * s + cc.X_re * c;
	const cplx b = cc.Y_im * s + cc.X_im * c;
	const double num = 4 * k.k_i.real() * k.k_f.real() * (k.E_i + 1) * (k.E_f + 1);
	return num / std::real(a * a + b * b);
}

double transmission_closed_form(const RegionKinematics& k)
{
	if(!propagating(k.k_i) || !propagating(k.k_f)) return 0.0;
	const double ki = k.k_i.real(), kf = k.k_f.real();
	if(k.case_tag == CaseTag::I) {
		const double A = k.E_i + 1, B = k.E_f + 1, p = k.p_i;
		double d1 = (ki - kf) * p;
		double d2 = A * B + ki * kf + p * k.p_f;
		return 4 * ki * kf * A * B / (d1 * d1 + d2 * d2);
	}
	return transmission_from_coefficients(k, cavity_coefficients(k.case_tag, k));
}

double transmission_printed_form(const RegionKinematics& k)
{
	const cplx ki = k.k_i, kf = k.k_f, k2 = k.k_2;
	const double A = k.E_i + 1, B = k.E_f + 1;
	const double pi_ = k.p_i, p2 = k.p_2, pf = k.p_f, E2 = k.E_2;
	cplx T;
	if(k.case_tag == CaseTag::I) {
		cplx d = (A * B + ki * kf - pi_ * pi_);
		T = 4.0 * ki * kf * A * B / ((ki + kf) * (ki + kf) * pi_ * pi_ + d * d);
		return T.real();
	}
	const cplx eta = k.eta;
	const cplx num = 4.0 * ki * k2 * k2 * kf * A * B;
	cplx ca, cb, cc, cd;
	if(k.case_tag == CaseTag::II) {
		ca = ki * B * (E2 - 1) + kf * A * (E2 + 1);
		cb = k2 * (pi_ * kf + ki * pf);
		cc = pi_ * B * (E2 - 1) - p2 * A * B + pf * A * (E2 + 1);
		cd = k2 * (A * B + (ki * kf - pi_ * pf));
		cplx x = ca * std::sin(eta) + cb * std::cos(eta);
		cplx y = cc * std::sin(eta) + cd * std::cos(eta);
		T = num / (x * x + y * y);
	} else {
		ca = ki * B * (E2 + 1) + kf * A * (E2 - 1);
		cb = k2 * (pi_ * kf + ki * pf);
		cc = pi_ * B * (E2 + 1) - p2 * A * B + pf * A * (E2 - 1);
		cd = k2 * (A * B + (ki * kf - pi_ * pf));
		cplx x = ca * std::sin(eta) + cb * std::cos(eta);
		cplx y = cc * std::sin(eta) - cd * std::cos(eta);
		T = num / (x * x + y * y);
	}
	return T.real();
}

double transmission(CaseTag c, double E, double p, const StepParameters& s)
{
	return transmission_closed_form(kinematics(c, E, p, s));
}

std::vector<double> hund_spectrum(CaseTag c, double p, double t, const std::vector<double>& energies,
                                  const StepParameters& s)
{
	auto w = klein_window(c, p, s);
	std::vector<double> rho(energies.size(), 0.0);
	for(std::size_t i = 0; i < energies.size(); ++i) {
		double E = energies[i];
		if(w.empty() || E <= w.lo || E >= w.hi) continue;
		rho[i] = 2 * t / pi * transmission(c, E, p, s);
	}
	return rho;
}

double channel_rate(CaseTag c, double p, const StepParameters& s, double tol)
{
	auto w = klein_window(c, p, s);
	if(w.empty()) return 0.0;
	boost::math::quadrature::tanh_sinh<double> integrator;
	auto f = [&](double E) { return transmission(c, E, p, s); };
	const int pieces = 32;
	double total = 0.0;
	for(int i = 0; i < pieces; ++i) {
		double a = w.lo + w.width() * i / pieces;
		double b = w.lo + w.width() * (i + 1) / pieces;
		double err = 0, l1 = 0;
		std::size_t levels = 0;
		double v = integrator.integrate(f, a, b, tol, &err, &l1, &levels);
		if(!std::isfinite(v) || err > std::max(tol * l1, tol) * 100) {
			std::ostringstream o;
			o << "channel_rate: quadrature did not converge on [" << a << ", " << b << "] (case "
			  << to_string(c) << ", p=" << p << ", error " << err << ", L1 " << l1 << ", levels " << levels << ")";
			throw QuadratureError(o.str());
		}
		total += v;
	}
	return 2 / pi * total;
}

std::vector<double> rate_profile(CaseTag c, const std::vector<double>& p_grid, const StepParameters& s)
{
	std::vector<double> g(p_grid.size());
	for(std::size_t i = 0; i < p_grid.size(); ++i) g[i] = channel_rate(c, p_grid[i], s);
	return g;
}

double total_rate(CaseTag c, const std::vector<double>& p_grid, double weight, const StepParameters& s)
{
	if(p_grid.empty()) return 0.0;
	auto g = rate_profile(c, p_grid, s);
	if(g.size() == 1) return g[0] * weight;
	double acc = 0.0;
	for(std::size_t i = 1; i < g.size(); ++i) acc += 0.5 * (g[i] + g[i - 1]) * (p_grid[i] - p_grid[i - 1]);
	return acc * weight;
}

std::vector<double> resonance_energies(CaseTag c, double p, const StepParameters& s)
{
	std::vector<double> out;
	if(c == CaseTag::I || s.L <= 0) return out;
	auto w = klein_window(c, p, s);
	double lo = w.hi;
	double hi = c == CaseTag::II ? s.V - std::sqrt(1 + p * p) : s.V;
	if(!(hi > lo)) return out;
	auto eta = [&](double E) { return kinematics(c, E, p, s).eta.real(); };
	const int n = 4000;
	double prev_E = lo, prev = eta(lo);
	for(int i = 1; i <= n; ++i) {
		double E = lo + (hi - lo) * i / n;
		double cur = eta(E);
		int m0 = static_cast<int>(std::floor(prev / pi));
		int m1 = static_cast<int>(std::floor(cur / pi));
		if(m0 != m1) {
			int m = std::max(m0, m1);
			double target = m * pi;
			if(target > 0) {
				double a = prev_E, b = E;
				for(int it = 0; it < 80; ++it) {
					double mid = 0.5 * (a + b);
					if((eta(mid) - target) * (eta(a) - target) <= 0) b = mid;
					else a = mid;
				}
				out.push_back(0.5 * (a + b));
			}
		}
		prev_E = E;
		prev = cur;
	}
	return out;
}

} // namespace klein
