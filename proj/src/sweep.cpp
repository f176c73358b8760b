#include "klein/sweep.hpp"

#include "klein/io.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace klein {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string job_id(const std::string& hash, CaseTag c, std::int64_t index)
{
	std::string key = hash + "/" + to_string(c) + "/" + std::to_string(index);
	char buf[64];
	std::snprintf(buf, sizeof buf, "case%s_p%03lld_%08x", to_string(c).c_str(), static_cast<long long>(index),
	              crc32_of(key));
	return buf;
}

ordered_json load_ledger(const fs::path& p)
{
	if(!fs::exists(p)) return ordered_json();
	try {
		return ordered_json::parse(read_text(p));
	} catch(const ordered_json::exception& e) {
		throw SweepError("ledger " + p.string() + " is not valid JSON: " + e.what());
	}
}

std::string hex32(std::uint32_t v)
{
	char buf[16];
	std::snprintf(buf, sizeof buf, "%08x", v);
	return buf;
}

bool file_matches(const fs::path& p, const std::string& crc_hex)
{
	if(!fs::exists(p)) return false;
	return hex32(file_checksum(read_text(p))) == crc_hex;
}

fs::path klb_path(const SweepPlan& plan, const SweepJob& j) { return plan.channel_dir() / (j.id + ".klb"); }
fs::path sidecar_path(const SweepPlan& plan, const SweepJob& j) { return plan.channel_dir() / (j.id + ".json"); }

} // namespace

std::vector<double> parallel_grid(const SweepControls& in)
{
	auto s = to_natural_units(in);
	std::vector<double> p(static_cast<std::size_t>(s.p_count));
	for(std::int64_t i = 0; i < s.p_count; ++i)
		p[i] = s.p_count == 1 ? s.p_min : s.p_min + (s.p_max - s.p_min) * static_cast<double>(i) / static_cast<double>(s.p_count - 1);
	return p;
}

std::vector<SweepJob> SweepPlan::pending() const
{
	std::vector<SweepJob> out;
	for(const auto& j : jobs)
		if(!completed.count(j.id)) out.push_back(j);
	return out;
}

SweepPlan plan_sweep(const Config& cfg, const fs::path& out_dir)
{
	SweepPlan plan;
	plan.config = to_atomic_units(cfg);
	validate(plan.config);
	plan.config_hash = config_hash(plan.config);
	plan.out_dir = out_dir;
	auto grid = parallel_grid(plan.config.sweep);
	for(CaseTag c : plan.config.sweep.cases) {
		with_case(plan.config, c); // rejects impossible case switches early
		for(std::size_t i = 0; i < grid.size(); ++i)
			plan.jobs.push_back({c, static_cast<std::int64_t>(i), grid[i], job_id(plan.config_hash, c, static_cast<std::int64_t>(i))});
	}
	auto ledger = load_ledger(plan.ledger_path());
	if(!ledger.is_null()) {
		if(ledger.value("config_hash", "") != plan.config_hash)
			throw SweepError("output directory " + out_dir.string() + " belongs to a different configuration (hash " +
			                 ledger.value("config_hash", "?") + ", this run " + plan.config_hash + ")");
		const auto& jobs = ledger["jobs"];
		for(const auto& j : plan.jobs) {
			if(!jobs.contains(j.id)) continue;
			const auto& e = jobs[j.id];
			if(e.value("status", "") != "done") continue;
			if(file_matches(klb_path(plan, j), e.value("klb_crc32", "")) &&
			   file_matches(sidecar_path(plan, j), e.value("json_crc32", "")))
				plan.completed.insert(j.id);
		}
	}
	return plan;
}

SweepOutcome run_jobs(SweepPlan& plan, const SweepOptions& opt)
{
	if(opt.workers < 1) throw SweepError("worker_count must be >= 1");
	pin_blas_threads();
	fs::create_directories(plan.channel_dir());
	fs::create_directories(plan.aggregate_dir());
	const std::string started = utc_timestamp();

	auto ledger = load_ledger(plan.ledger_path());
	if(ledger.is_null()) {
		ledger = ordered_json::object();
		ledger["config_hash"] = plan.config_hash;
		ledger["config"] = serialize_config(plan.config);
		ledger["jobs"] = ordered_json::object();
	}
	if(opt.force) plan.completed.clear();
	auto todo = plan.pending();

	SweepOutcome outcome;
	outcome.reused = plan.jobs.size() - todo.size();

	const Config nat = to_natural_units(plan.config);
	ChannelOptions copt;
	copt.times = sample_times(nat.run.t_max, nat.run.t_step);
	copt.spectrum_times = sample_times(nat.run.t_max, nat.run.spectrum_step);
	copt.backend = nat.run.backend;
	copt.dt = nat.run.dt;

	std::mutex mu;
	std::atomic<std::size_t> next{0};
	std::size_t done_count = plan.completed.size();
	std::vector<std::string> failures;

	auto write_ledger = [&] { write_text_atomic(plan.ledger_path(), ledger.dump(2) + "\n"); };
	{
		std::lock_guard lock(mu);
		write_ledger();
	}

	auto work = [&] {
		for(;;) {
			std::size_t i = next.fetch_add(1);
			if(i >= todo.size()) return;
			const auto& job = todo[i];
			try {
				auto res = run_channel(plan.config, job.case_tag, job.p_parallel, 1, copt);
				Klb1Array arr;
				arr.dims = {static_cast<std::uint64_t>(res.rho_k.rows()), static_cast<std::uint64_t>(res.rho_k.cols())};
				arr.data.resize(res.rho_k.size());
				for(Eigen::Index r = 0; r < res.rho_k.rows(); ++r)
					for(Eigen::Index c = 0; c < res.rho_k.cols(); ++c)
						arr.data[static_cast<std::size_t>(r * res.rho_k.cols() + c)] = res.rho_k(r, c);
				std::string kbytes = klb1_bytes(arr);
				ordered_json side;
				side["job"] = job.id;
				side["case"] = to_string(job.case_tag);
				side["index"] = job.index;
				side["p_parallel"] = job.p_parallel;
				side["spin"] = res.spin;
				side["units"] = "natural";
				side["config_hash"] = plan.config_hash;
				side["box_length"] = res.grid.box_length;
				side["times"] = res.times;
				side["spectrum_times"] = res.spectrum_times;
				side["number"] = res.number;
				side["k"] = res.k;
				std::string sbytes = side.dump(1) + "\n";
				write_text_atomic(klb_path(plan, job), kbytes);
				write_text_atomic(sidecar_path(plan, job), sbytes);
				std::lock_guard lock(mu);
				ledger["jobs"][job.id] = {{"status", "done"},
				                          {"case", to_string(job.case_tag)},
				                          {"index", job.index},
				                          {"p_parallel", job.p_parallel},
				                          {"klb_crc32", hex32(file_checksum(kbytes))},
				                          {"json_crc32", hex32(file_checksum(sbytes))},
				                          {"seconds", res.seconds}};
				plan.completed.insert(job.id);
				write_ledger();
				++done_count;
				++outcome.ran;
				if(opt.progress) opt.progress(done_count, plan.jobs.size());
			} catch(const std::exception& e) {
				std::lock_guard lock(mu);
				ledger["jobs"][job.id] = {{"status", "failed"}, {"case", to_string(job.case_tag)},
				                          {"index", job.index}, {"error", e.what()}};
				failures.push_back(job.id + ": " + e.what());
				write_ledger();
			}
		}
	};

	std::vector<std::thread> pool;
	int n_threads = std::min<int>(opt.workers, static_cast<int>(std::max<std::size_t>(todo.size(), 1)));
	for(int w = 0; w < n_threads; ++w) pool.emplace_back(work);
	for(auto& t : pool) t.join();

	if(!failures.empty()) {
		std::string msg = "sweep jobs failed:";
		for(const auto& f : failures) msg += "\n  " + f;
		throw SweepError(msg);
	}

	aggregate(plan);

	RunManifest m;
	m.config = plan.config;
	m.tool_version = tool_version();
	m.started = started;
	m.finished = utc_timestamp();
	for(const auto& name : aggregate_files(plan)) {
		auto p = plan.aggregate_dir() / name;
		m.outputs.push_back(manifest_entry(p.string()));
		outcome.aggregates.push_back(p);
	}
	for(const auto& j : plan.jobs) {
		m.outputs.push_back(manifest_entry(klb_path(plan, j).string()));
		m.outputs.push_back(manifest_entry(sidecar_path(plan, j).string()));
		m.timings[j.id] = ledger["jobs"][j.id].value("seconds", 0.0);
	}
	outcome.manifest = plan.out_dir / "manifest.json";
	write_text_atomic(outcome.manifest, manifest_json(m));
	return outcome;
}

std::vector<const StoredChannel*> StoredRun::of_case(CaseTag c) const
{
	std::vector<const StoredChannel*> out;
	for(const auto& ch : channels)
		if(ch.job.case_tag == c) out.push_back(&ch);
	return out;
}

namespace {

StoredChannel load_channel(const SweepPlan& plan, const SweepJob& j)
{
	StoredChannel ch;
	ch.job = j;
	auto side = ordered_json::parse(read_text(sidecar_path(plan, j)));
	ch.times = side["times"].get<std::vector<double>>();
	ch.spectrum_times = side.value("spectrum_times", ch.times);
	ch.number = side["number"].get<std::vector<double>>();
	ch.k = side["k"].get<std::vector<double>>();
	ch.box_length = side["box_length"].get<double>();
	ch.transient = to_natural_units(plan.config).run.transient;
	auto arr = read_klb1(klb_path(plan, j));
	if(arr.dims.size() != 2 || arr.dims[0] != ch.spectrum_times.size() || arr.dims[1] != ch.k.size())
		throw IoError("channel file " + klb_path(plan, j).string() + " has unexpected shape");
	ch.rho_k.resize(static_cast<Eigen::Index>(arr.dims[0]), static_cast<Eigen::Index>(arr.dims[1]));
	for(std::size_t r = 0; r < arr.dims[0]; ++r)
		for(std::size_t c = 0; c < arr.dims[1]; ++c)
			ch.rho_k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = arr.data[r * arr.dims[1] + c];
	return ch;
}

} // namespace

StoredRun load_run(const fs::path& out_dir)
{
	auto ledger = load_ledger(out_dir / "ledger.json");
	if(ledger.is_null()) throw IoError("no ledger in " + out_dir.string());
	Config cfg = parse_config(ledger["config"].get<std::string>());
	SweepPlan plan = plan_sweep(cfg, out_dir);
	if(!plan.pending().empty()) throw SweepError("run in " + out_dir.string() + " is incomplete");
	StoredRun run;
	run.config = plan.config;
	for(const auto& j : plan.jobs) run.channels.push_back(load_channel(plan, j));
	return run;
}

std::vector<std::string> aggregate_files(const SweepPlan& plan)
{
	std::vector<std::string> out;
	for(CaseTag c : plan.config.sweep.cases) {
		auto s = "case_" + to_string(c);
		for(const char* suffix : {"_number.csv", "_rates.csv", "_emd.klb", "_emd_axes.json", "_rho.klb"})
			out.push_back(s + suffix);
	}
	out.push_back("summary.json");
	return out;
}

void aggregate(const SweepPlan& plan)
{
	const Config nat = to_natural_units(plan.config);
	auto grid = parallel_grid(plan.config.sweep);
	const double dp = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
	ordered_json summary;
	summary["units"] = "natural";
	summary["config_hash"] = plan.config_hash;
	summary["spin_factor"] = 2;
	summary["channel_spacing"] = dp;
	std::map<CaseTag, double> totals;

	for(CaseTag c : plan.config.sweep.cases) {
		std::vector<StoredChannel> chans;
		for(const auto& j : plan.jobs)
			if(j.case_tag == c) chans.push_back(load_channel(plan, j));
		const auto prefix = plan.aggregate_dir() / ("case_" + to_string(c));
		const auto& times = chans.front().times;

		CsvTable num;
		num.meta = {{"quantity", "particle number summed over channels (one spin)"},
		            {"case", to_string(c)},
		            {"units", "natural (t in hbar/mc^2)"},
		            {"channels", std::to_string(chans.size())}};
		num.columns = {"t", "N_sum"};
		for(std::size_t i = 0; i < times.size(); ++i) {
			double s = 0;
			for(const auto& ch : chans) s += ch.number[i];
			num.rows.push_back({times[i], s});
		}
		write_csv(prefix.string() + "_number.csv", num);

		CsvTable rates;
		rates.meta = {{"quantity", "per-channel creation rate dN/dt (one spin)"},
		              {"case", to_string(c)},
		              {"units", "natural (p_parallel in mc)"},
		              {"fit_window", format_double(nat.run.transient) + " .. " + format_double(nat.run.t_max)}};
		rates.columns = {"p_parallel", "rate", "rate_error"};
		double total = 0;
		for(std::size_t i = 0; i < chans.size(); ++i) {
			double r = std::nan(""), e = std::nan("");
			try {
				auto f = fit_rate(chans[i].times, chans[i].number, nat.run.transient, nat.run.t_max);
				r = f.rate;
				e = f.rate_error;
			} catch(const std::invalid_argument&) {
			}
			rates.rows.push_back({chans[i].job.p_parallel, r, e});
			total += r;
		}
		write_csv(prefix.string() + "_rates.csv", rates);
		totals[c] = 2 * total * dp;

		Klb1Array emd;
		const auto nk = static_cast<std::uint64_t>(chans.front().k.size());
		emd.dims = {chans.size(), nk};
		Klb1Array rho;
		rho.dims = {chans.size(), chans.front().spectrum_times.size(), nk};
		for(const auto& ch : chans) {
			auto last = ch.rho_k.rows() - 1;
			for(Eigen::Index j = 0; j < ch.rho_k.cols(); ++j) emd.data.push_back(ch.rho_k(last, j));
			for(Eigen::Index r = 0; r < ch.rho_k.rows(); ++r)
				for(Eigen::Index j = 0; j < ch.rho_k.cols(); ++j) rho.data.push_back(ch.rho_k(r, j));
		}
		write_klb1(prefix.string() + "_emd.klb", emd);
		write_klb1(prefix.string() + "_rho.klb", rho);

		ordered_json axes;
		axes["units"] = "natural";
		axes["t"] = times.back();
		axes["times"] = times;
		axes["spectrum_times"] = chans.front().spectrum_times;
		std::vector<double> ps;
		for(const auto& ch : chans) ps.push_back(ch.job.p_parallel);
		axes["p_parallel"] = ps;
		axes["p_perp"] = chans.front().k;
		write_text_atomic(prefix.string() + "_emd_axes.json", axes.dump(1) + "\n");

		summary["cases"][to_string(c)] = {{"total_rate", totals[c]}, {"channels", chans.size()}};
	}
	if(totals.count(CaseTag::I) && totals.count(CaseTag::II) && totals[CaseTag::II] != 0)
		summary["ratio_I_II"] = totals[CaseTag::I] / totals[CaseTag::II];
	if(totals.count(CaseTag::II) && totals.count(CaseTag::III) && totals[CaseTag::III] != 0)
		summary["ratio_II_III"] = totals[CaseTag::II] / totals[CaseTag::III];
	write_text_atomic(plan.aggregate_dir() / "summary.json", summary.dump(2) + "\n");
}

} // namespace klein
