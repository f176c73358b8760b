#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "klein/io.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

using namespace klein;
namespace fs = std::filesystem;

namespace {

fs::path scratch()
{
	auto p = fs::temp_directory_path() / "klein_io_test";
	fs::create_directories(p);
	return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> awkward_values()
{
	std::vector<double> v = {0.0,  -0.0, 1.0 / 3.0, 0.1, 1e-300, std::numeric_limits<double>::denorm_min(),
	                         -2.5e17, std::numeric_limits<double>::max(), 137.036};
	std::mt19937_64 rng(42);
	std::uniform_real_distribution<double> u(-1e3, 1e3);
	for(int i = 0; i < 200; ++i) v.push_back(u(rng));
	return v;
}

} // namespace

TEST_CASE("CSV round trip is bit exact")
{
	CsvTable t;
	t.meta = {{"case", "II"}, {"t", "12.5"}, {"unit", "c^2"}};
	t.columns = {"E_over_c2", "rho"};
	auto v = awkward_values();
	for(std::size_t i = 0; i + 1 < v.size(); i += 2) t.rows.push_back({v[i], v[i + 1]});
	auto path = scratch() / "t.csv";
	write_csv(path, t);
	auto back = read_csv(path);
	CHECK(back.meta == t.meta);
	CHECK(back.columns == t.columns);
	REQUIRE(back.rows.size() == t.rows.size());
	for(std::size_t r = 0; r < t.rows.size(); ++r)
		for(std::size_t c = 0; c < 2; ++c) CHECK(same_bits(back.rows[r][c], t.rows[r][c]));
	CHECK(back.meta_value("t") == "12.5");
	CHECK(back.column("rho").size() == t.rows.size());
	CHECK_THROWS_AS(back.column("nope"), IoError);
}

TEST_CASE("CSV rejects ragged rows")
{
	CHECK_THROWS_AS(parse_csv("a,b\n1,2\n3\n"), IoError);
	CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), IoError);
}

TEST_CASE("KLB1 round trip is bit exact")
{
	Klb1Array a;
	a.dims = {3, 4, 5};
	auto v = awkward_values();
	a.data.assign(v.begin(), v.begin() + 60);
	auto path = scratch() / "a.klb";
	write_klb1(path, a);
	auto b = read_klb1(path);
	CHECK(b.dims == a.dims);
	REQUIRE(b.data.size() == a.data.size());
	for(std::size_t i = 0; i < a.data.size(); ++i) CHECK(same_bits(a.data[i], b.data[i]));
	CHECK(klb1_bytes(a) == read_text(path));
}

TEST_CASE("KLB1 layout")
{
	Klb1Array a;
	a.dims = {2};
	a.data = {1.0, 2.0};
	auto bytes = klb1_bytes(a);
	// magic + rank + one dim + payload + crc
	CHECK(bytes.size() == 4 + 4 + 8 + 16 + 4);
	CHECK(bytes.substr(0, 4) == "KLB1");
	std::uint32_t rank;
	std::memcpy(&rank, bytes.data() + 4, 4);
	CHECK(rank == 1);
	std::uint32_t crc;
	std::memcpy(&crc, bytes.data() + bytes.size() - 4, 4);
	CHECK(crc == crc32_of(bytes.substr(0, bytes.size() - 4)));
}

TEST_CASE("KLB1 corruption is detected")
{
	Klb1Array a;
	a.dims = {4};
	a.data = {1, 2, 3, 4};
	auto bytes = klb1_bytes(a);
	auto flipped = bytes;
	flipped[20] ^= 0x01;
	CHECK_THROWS_AS(parse_klb1(flipped), IoError);
	CHECK_THROWS_AS(parse_klb1(bytes.substr(0, bytes.size() - 1)), IoError);
	CHECK_THROWS_AS(parse_klb1("KLB2" + bytes.substr(4)), IoError);
	a.dims = {5};
	CHECK_THROWS(klb1_bytes(a));
}

TEST_CASE("file checksums distinguish KLB1 files")
{
	Klb1Array a, b;
	a.dims = b.dims = {2};
	a.data = {1, 2};
	b.data = {1, 3};
	// the plain CRC of a message followed by its own CRC is a constant
	CHECK(crc32_of(klb1_bytes(a)) == crc32_of(klb1_bytes(b)));
	CHECK(file_checksum(klb1_bytes(a)) != file_checksum(klb1_bytes(b)));
	CHECK(file_checksum("plain text") == crc32_of("plain text"));
}

TEST_CASE("I/O errors carry the path")
{
	try {
		read_text("/nonexistent/dir/file.csv");
		FAIL("expected IoError");
	} catch(const IoError& e) {
		CHECK(std::string(e.what()).find("/nonexistent/dir/file.csv") != std::string::npos);
	}
	CHECK_THROWS_AS(write_text_atomic("/nonexistent/dir/out.txt", "x"), IoError);
}

TEST_CASE("atomic writes leave no temporaries")
{
	auto dir = scratch() / "atomic";
	fs::remove_all(dir);
	fs::create_directories(dir);
	write_text_atomic(dir / "f.txt", "one");
	write_text_atomic(dir / "f.txt", "two");
	CHECK(read_text(dir / "f.txt") == "two");
	CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);
}
