#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "klein/io.hpp"
#include "klein/sweep.hpp"

#include <json.hpp>

using namespace klein;
namespace fs = std::filesystem;

namespace {

std::string ini(const std::string& sweep_block, const std::string& e_phi0 = "2.5c^2")
{
	return "[fields]\ncase = II\ne_phi0 = " + e_phi0 +
	       "\ne_A0 = 0.6c^2\nx_B = 4lambda_c\n\n"
	       "[grid]\nn_points = 128\nbox_length = 40lambda_c\n\n"
	       "[run]\nt_max = 8tau_c\nt_step = 0.5tau_c\ntransient = 2tau_c\n\n"
	       "[sweep]\n" +
	       sweep_block;
}

const std::string small_sweep = "cases = I,II,III\np_min = -0.4c\np_max = 0.4c\np_count = 3\n";

fs::path fresh(const std::string& name)
{
	auto p = fs::temp_directory_path() / "klein_sweep_test" / name;
	fs::remove_all(p);
	fs::create_directories(p);
	return p;
}

std::map<std::string, std::string> aggregate_bytes(const SweepPlan& plan)
{
	std::map<std::string, std::string> out;
	for(const auto& f : aggregate_files(plan)) out[f] = read_text(plan.aggregate_dir() / f);
	return out;
}

SweepOutcome run(SweepPlan& plan, int workers, bool force = false)
{
	SweepOptions o;
	o.workers = workers;
	o.force = force;
	return run_jobs(plan, o);
}

} // namespace

TEST_CASE("plans are deterministic")
{
	auto cfg = parse_config(ini("cases = I,II\np_min = -1.5c\np_max = 1.5c\np_count = 61\n"));
	auto dir = fresh("plan");
	auto a = plan_sweep(cfg, dir);
	auto b = plan_sweep(cfg, dir);
	CHECK(a.jobs.size() == 122);
	CHECK(a.pending().size() == 122);
	REQUIRE(a.jobs.size() == b.jobs.size());
	for(std::size_t i = 0; i < a.jobs.size(); ++i) CHECK(a.jobs[i].id == b.jobs[i].id);
	std::set<std::string> ids;
	for(const auto& j : a.jobs) ids.insert(j.id);
	CHECK(ids.size() == a.jobs.size());
	CHECK(a.jobs.front().p_parallel == doctest::Approx(-1.5));
	CHECK(a.jobs[30].p_parallel == doctest::Approx(0.0).epsilon(1e-15));

	auto changed = parse_config(ini("cases = I,II\np_min = -1.5c\np_max = 1.5c\np_count = 61\n", "2.6c^2"));
	auto c = plan_sweep(changed, fresh("plan2"));
	CHECK(c.jobs.front().id != a.jobs.front().id);
}

TEST_CASE("aggregates do not depend on the worker count")
{
	auto cfg = parse_config(ini(small_sweep));
	auto p1 = plan_sweep(cfg, fresh("w1"));
	auto p3 = plan_sweep(cfg, fresh("w3"));
	auto r1 = run(p1, 1);
	auto r3 = run(p3, 3);
	CHECK(r1.ran == 9);
	CHECK(r3.ran == 9);
	auto a = aggregate_bytes(p1);
	auto b = aggregate_bytes(p3);
	CHECK(a.size() == 16);
	CHECK(a == b);
	auto j = nlohmann::json::parse(read_text(r1.manifest));
	CHECK(j["outputs"].size() >= 16);
}

TEST_CASE("resume recomputes only missing jobs")
{
	auto cfg = parse_config(ini(small_sweep));
	auto dir = fresh("resume");
	auto plan = plan_sweep(cfg, dir);
	run(plan, 2);
	auto before = aggregate_bytes(plan);

	// drop two channel files and tamper with a third
	fs::remove(dir / "channels" / (plan.jobs[1].id + ".klb"));
	fs::remove(dir / "channels" / (plan.jobs[4].id + ".json"));
	{
		std::ofstream(dir / "channels" / (plan.jobs[7].id + ".json"), std::ios::app) << " ";
	}
	auto again = plan_sweep(cfg, dir);
	CHECK(again.pending().size() == 3);
	auto r = run(again, 2);
	CHECK(r.ran == 3);
	CHECK(r.reused == 6);
	CHECK(aggregate_bytes(again) == before);

	auto idle = plan_sweep(cfg, dir);
	CHECK(idle.pending().empty());
	CHECK(run(idle, 1).ran == 0);
	CHECK(run(idle, 1, true).ran == 9);
	CHECK(aggregate_bytes(idle) == before);
}

TEST_CASE("a directory belongs to one configuration")
{
	auto dir = fresh("collision");
	auto cfg = parse_config(ini("cases = I\np_count = 1\n"));
	auto plan = plan_sweep(cfg, dir);
	run(plan, 1);
	auto other = parse_config(ini("cases = I\np_count = 1\n", "2.6c^2"));
	CHECK_THROWS_AS(plan_sweep(other, dir), SweepError);
}

TEST_CASE("single channel aggregate reproduces the channel")
{
	auto dir = fresh("single");
	auto cfg = parse_config(ini("cases = I\np_count = 1\n"));
	auto plan = plan_sweep(cfg, dir);
	run(plan, 1);
	auto stored = load_run(dir);
	REQUIRE(stored.channels.size() == 1);
	const auto& ch = stored.channels[0];
	auto number = read_csv(plan.aggregate_dir() / "case_I_number.csv");
	CHECK(number.column("t") == ch.times);
	auto col = number.columns.back();
	CHECK(number.column(col) == ch.number);
	auto emd = read_klb1(plan.aggregate_dir() / "case_I_emd.klb");
	REQUIRE(emd.dims.size() == 2);
	CHECK(emd.dims[0] == 1);
	for(std::size_t j = 0; j < ch.k.size(); ++j) CHECK(emd.data[j] == ch.rho_k(ch.rho_k.rows() - 1, j));
	CHECK(stored.config == cfg);
}
