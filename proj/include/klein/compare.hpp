#pragma once

#include "klein/scattering.hpp"
#include "klein/sweep.hpp"

#include <string>
#include <vector>

namespace klein {

// Relative L2 deviation of rho(E,t)*pi/(2t) (hund normalization, k<0 branch) from T(E)
// over the central `fraction` of the Klein window.
double hund_relative_l2(CaseTag c, double p_parallel, const StepParameters& s, const std::vector<double>& k,
                        const std::vector<double>& rho_k, double box_length, double t, double fraction = 0.8);

// Fringe contrast of the k<0 energy spectrum over the central `fraction` of the Klein window.
double spectrum_fringe_contrast(CaseTag c, double p_parallel, const StepParameters& s, const std::vector<double>& k,
                                const std::vector<double>& rho_k, double box_length, double fraction = 0.8);

struct ComparisonRow
{
	std::string case_label;
	std::string quantity;
	double numeric = 0.0;
	double analytic = 0.0;
	double deviation = 0.0;
	double tolerance = 0.0;
	bool pass = false;
};

struct ComparisonReport
{
	std::vector<ComparisonRow> rows;
	bool pass() const;
	std::string text() const;
};

ComparisonReport compare_run(const StoredRun& run, double tol);

} // namespace klein
