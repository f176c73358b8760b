#pragma once

#include "klein/pipeline.hpp"
#include "klein/units.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace klein {

class SweepError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

struct SweepJob
{
	CaseTag case_tag = CaseTag::I;
	std::int64_t index = 0;
	double p_parallel = 0.0; // natural
	std::string id;          // hash of (case, index, config hash)
};

struct SweepPlan
{
	Config config; // atomic units, as parsed
	std::string config_hash;
	std::filesystem::path out_dir;
	std::vector<SweepJob> jobs;
	std::set<std::string> completed;

	std::vector<SweepJob> pending() const;
	std::filesystem::path channel_dir() const { return out_dir / "channels"; }
	std::filesystem::path aggregate_dir() const { return out_dir / "aggregate"; }
	std::filesystem::path ledger_path() const { return out_dir / "ledger.json"; }
};

std::vector<double> parallel_grid(const SweepControls& s_nat);

// Deterministic plan; picks up completed jobs from an existing ledger. Refuses a directory
// whose ledger belongs to a different configuration.
SweepPlan plan_sweep(const Config& cfg, const std::filesystem::path& out_dir);

struct SweepOptions
{
	int workers = 1;
	bool force = false;
	// called after each finished job with the number completed so far
	std::function<void(std::size_t, std::size_t)> progress;
};

struct SweepOutcome
{
	std::vector<std::filesystem::path> aggregates;
	std::filesystem::path manifest;
	std::size_t ran = 0;
	std::size_t reused = 0;
};

SweepOutcome run_jobs(SweepPlan& plan, const SweepOptions& opt);

// Stored per-channel results (no recomputation).
struct StoredChannel
{
	SweepJob job;
	std::vector<double> times;
	std::vector<double> number;
	std::vector<double> k;
	std::vector<double> spectrum_times;
	Eigen::MatrixXd rho_k; // rows: spectrum_times
	double box_length = 0.0;
	double transient = 0.0;
};

struct StoredRun
{
	Config config;
	std::vector<StoredChannel> channels; // ordered by (case, index)
	std::vector<const StoredChannel*> of_case(CaseTag c) const;
};

StoredRun load_run(const std::filesystem::path& out_dir);

// Files written by the aggregation pass, relative names.
std::vector<std::string> aggregate_files(const SweepPlan& plan);
void aggregate(const SweepPlan& plan);

} // namespace klein
