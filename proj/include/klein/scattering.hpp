#pragma once

#include "klein/units.hpp"

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace klein {

using cplx = std::complex<double>;

// Sharp-step scattering model, natural units throughout.
struct StepParameters
{
	double V = 2.5;     // scalar step height
	double delta = 0.6; // parallel-momentum shift across the vector step
	double L = 24.5;    // separation of the two steps

	static StepParameters from(const FieldConfiguration& f);
};

struct RegionKinematics
{
	CaseTag case_tag = CaseTag::I;
	double E_i = 0, E_2 = 0, E_f = 0;
	double p_i = 0, p_2 = 0, p_f = 0; // parallel
	cplx k_i, k_2, k_f;               // perpendicular, Im >= 0
	double L = 0;
	cplx eta; // k_2 * L
	bool has_middle() const { return case_tag != CaseTag::I; }
};

struct ScatteringSolution
{
	cplx r, t, c1, c2;
	double R = 0.0;
	double T = 0.0;
	double condition = 0.0;
	RegionKinematics kin;
};

struct EnergyInterval
{
	double lo = 0.0;
	double hi = 0.0;
	bool empty() const { return !(hi > lo); }
	double width() const { return empty() ? 0.0 : hi - lo; }
};

class SingularSystemError : public std::runtime_error
{
public:
	SingularSystemError(const std::string& what, double cond) : std::runtime_error(what), condition(cond) {}
	double condition;
};

class QuadratureError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

// principal square root with Im >= 0
cplx perp_momentum(double E, double p_parallel);

RegionKinematics kinematics(CaseTag c, double E_i, double p_parallel, const StepParameters& s);
EnergyInterval klein_window(CaseTag c, double p_parallel, const StepParameters& s);

ScatteringSolution match_solve(const RegionKinematics& kin);
double transmission_closed_form(const RegionKinematics& kin);
// Literal closed-form arrangement without the flux-consistent coefficients; comparison only.
double transmission_printed_form(const RegionKinematics& kin);

// Denominator coefficients of the two-step closed form:
// T = 4 k_i k_f (E_i+1)(E_f+1) / [(Y_re s + X_re c)^2 + (Y_im s + X_im c)^2],
// s = sin(eta)/k_2, c = cos(eta).
struct CavityCoefficients
{
	cplx X_re, X_im, Y_re, Y_im;
};
CavityCoefficients cavity_coefficients(CaseTag coefficient_set, const RegionKinematics& kin);
double transmission_from_coefficients(const RegionKinematics& kin, const CavityCoefficients& cc);

double transmission(CaseTag c, double E, double p_parallel, const StepParameters& s);

std::vector<double> hund_spectrum(CaseTag c, double p_parallel, double t, const std::vector<double>& energies,
                                  const StepParameters& s);

// (2/pi) * integral of T over the Klein window
double channel_rate(CaseTag c, double p_parallel, const StepParameters& s, double tol = 1e-10);
double total_rate(CaseTag c, const std::vector<double>& p_grid, double weight, const StepParameters& s);
std::vector<double> rate_profile(CaseTag c, const std::vector<double>& p_grid, const StepParameters& s);

// Energies above the Klein window where the middle-region phase eta crosses a multiple of pi.
std::vector<double> resonance_energies(CaseTag c, double p_parallel, const StepParameters& s);

} // namespace klein
