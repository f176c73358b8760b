#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace klein {

class IoError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

std::string read_text(const std::filesystem::path& p);
// Writes through a temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& p, const std::string& content);

std::uint32_t crc32_of(const std::string& bytes);
// Checksum recorded in ledgers and manifests. A KLB1 file carries its own CRC32 as a trailer, and the CRC32
// of a message followed by its CRC is a constant, so for those files the trailer is excluded.
std::uint32_t file_checksum(const std::string& bytes);

// Columnar CSV: a comment block of "# key: value" lines, one header line, numeric rows.
struct CsvTable
{
	std::vector<std::pair<std::string, std::string>> meta;
	std::vector<std::string> columns;
	std::vector<std::vector<double>> rows;

	std::vector<double> column(const std::string& name) const;
	std::string meta_value(const std::string& key) const;
};

std::string format_double(double v);
std::string csv_string(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& p, const CsvTable& t);
CsvTable read_csv(const std::filesystem::path& p);

// Binary array: "KLB1", u32 rank, u64 dims, little-endian f64 payload, trailing CRC32 of everything before it.
struct Klb1Array
{
	std::vector<std::uint64_t> dims;
	std::vector<double> data; // row-major
	std::uint64_t count() const;
};

std::string klb1_bytes(const Klb1Array& a);
Klb1Array parse_klb1(const std::string& bytes);
void write_klb1(const std::filesystem::path& p, const Klb1Array& a);
Klb1Array read_klb1(const std::filesystem::path& p);

} // namespace klein
