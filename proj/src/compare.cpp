#include "klein/compare.hpp"

#include "klein/observables.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace klein {

namespace {

std::pair<double, double> central(const EnergyInterval& w, double fraction)
{
	double pad = 0.5 * (1 - fraction) * w.width();
	return {w.lo + pad, w.hi - pad};
}

std::size_t first_at_or_after(const std::vector<double>& t, double t0)
{
	for(std::size_t i = 0; i < t.size(); ++i)
		if(t[i] >= t0 - 1e-9) return i;
	return t.size();
}

} // namespace

double hund_relative_l2(CaseTag c, double p, const StepParameters& s, const std::vector<double>& k,
                        const std::vector<double>& rho_k, double box_length, double t, double fraction)
{
	auto w = klein_window(c, p, s);
	if(w.empty() || !(t > 0)) return std::nan("");
	auto [lo, hi] = central(w, fraction);
	auto spec = energy_spectrum(rho_k, k, p, box_length, SpectralNormalization::hund);
	double num = 0, den = 0;
	for(std::size_t j = 0; j < spec.energy.size(); ++j) {
		double E = spec.energy[j];
		if(E < lo || E > hi) continue;
		double model = transmission(c, E, p, s);
		double d = spec.negative_k[j] * std::numbers::pi / (2 * t) - model;
		num += d * d;
		den += model * model;
	}
	return den > 0 ? std::sqrt(num / den) : std::nan("");
}

double spectrum_fringe_contrast(CaseTag c, double p, const StepParameters& s, const std::vector<double>& k,
                                const std::vector<double>& rho_k, double box_length, double fraction)
{
	auto w = klein_window(c, p, s);
	auto [lo, hi] = central(w, fraction);
	auto spec = energy_spectrum(rho_k, k, p, box_length, SpectralNormalization::landauer);
	return fringe_contrast(spec.energy, spec.negative_k, lo, hi);
}

bool ComparisonReport::pass() const
{
	for(const auto& r : rows)
		if(!r.pass) return false;
	return true;
}

std::string ComparisonReport::text() const
{
	std::ostringstream o;
	char buf[256];
	std::snprintf(buf, sizeof buf, "%-5s %-30s %14s %14s %11s %9s %s\n", "case", "quantity", "numeric", "analytic",
	              "deviation", "tol", "verdict");
	o << buf;
	for(const auto& r : rows) {
		std::snprintf(buf, sizeof buf, "%-5s %-30s %14.6g %14.6g %11.4g %9.3g %s\n", r.case_label.c_str(),
		              r.quantity.c_str(), r.numeric, r.analytic, r.deviation, r.tolerance, r.pass ? "PASS" : "FAIL");
		o << buf;
	}
	o << "overall: " << (pass() ? "PASS" : "FAIL") << "\n";
	return o.str();
}

ComparisonReport compare_run(const StoredRun& run, double tol)
{
	ComparisonReport rep;
	const Config nat = to_natural_units(run.config);
	auto add = [&](std::string cs, std::string q, double num, double ana, double dev, double t) {
		bool ok = std::isfinite(dev) && dev <= t;
		rep.rows.push_back({std::move(cs), std::move(q), num, ana, dev, t, ok});
	};
	std::map<CaseTag, std::pair<double, double>> rates; // numeric, analytic sums

	for(CaseTag c : run.config.sweep.cases) {
		auto chans = run.of_case(c);
		if(chans.empty()) continue;
		Config cc = to_natural_units(with_case(run.config, c));
		auto steps = StepParameters::from(cc.fields);
		const auto label = to_string(c);

		const StoredChannel* best = chans.front();
		double best_sum = -1;
		for(const auto* ch : chans) {
			double s = ch->rho_k.row(ch->rho_k.rows() - 1).sum();
			if(s > best_sum) {
				best_sum = s;
				best = ch;
			}
		}
		const double p = best->job.p_parallel;
		const auto w = klein_window(c, p, steps);

		// support edges of the production spectrum at the final time
		auto edges = uniform_edges(1.0, steps.V, 0.025);
		std::vector<std::vector<double>> rows;
		for(Eigen::Index r = 0; r < best->rho_k.rows(); ++r) {
			Eigen::VectorXd v = best->rho_k.row(r);
			rows.emplace_back(v.data(), v.data() + v.size());
		}
		auto tr = time_resolved_spectrum(best->spectrum_times, rows, best->k, p, best->box_length, edges, Branch::negative_k,
		                                 SpectralNormalization::landauer);
		auto iref = first_at_or_after(best->spectrum_times, nat.run.transient);
		if(iref + 1 < best->spectrum_times.size() && !w.empty()) {
			auto prod = production_spectrum(tr, best->spectrum_times[iref]);
			auto sup = support_of(prod.rho.back(), 0.01);
			if(!sup.empty) {
				double lo = edges[sup.first], hi = edges[sup.last + 1];
				add(label, "window_lower_edge", lo, w.lo, std::abs(lo - w.lo) / w.lo, tol);
				add(label, "window_upper_edge", hi, w.hi, std::abs(hi - w.hi) / w.hi, tol);
			}
		}

		double t_end = best->spectrum_times.back();
		double l2 = hund_relative_l2(c, p, steps, best->k, rows.back(), best->box_length, t_end);
		add(label, "hund_relative_l2", l2, 0.0, l2, tol);

		double num = 0, ana = 0;
		for(const auto* ch : chans) {
			try {
				num += fit_rate(ch->times, ch->number, nat.run.transient, nat.run.t_max).rate;
			} catch(const std::invalid_argument&) {
				num = std::nan("");
			}
			ana += channel_rate(c, ch->job.p_parallel, steps);
		}
		rates[c] = {num, ana};

		if(c == CaseTag::II) {
			double onset = std::nan("");
			for(std::size_t i = 1; i < best->spectrum_times.size(); ++i) {
				if(spectrum_fringe_contrast(c, p, steps, best->k, rows[i], best->box_length) >= 0.3) {
					onset = best->spectrum_times[i];
					break;
				}
			}
			double ref = 2 * steps.L;
			add(label, "fringe_onset_time", onset, ref, std::abs(onset - ref) / ref, tol);
		}
	}
	auto ratio = [&](CaseTag a, CaseTag b, const char* name) {
		if(!rates.count(a) || !rates.count(b)) return;
		double n = rates[a].first / rates[b].first;
		double an = rates[a].second / rates[b].second;
		add(to_string(a) + "/" + to_string(b), name, n, an, std::abs(n - an) / an, tol);
	};
	ratio(CaseTag::I, CaseTag::II, "rate_ratio");
	ratio(CaseTag::II, CaseTag::III, "rate_ratio");
	return rep;
}

} // namespace klein
