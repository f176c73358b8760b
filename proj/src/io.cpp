#include "klein/io.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

namespace klein {

static_assert(std::endian::native == std::endian::little, "KLB1 writer assumes a little-endian host");

std::string read_text(const std::filesystem::path& p)
{
	std::ifstream in(p, std::ios::binary);
	if(!in) throw IoError("cannot open " + p.string());
	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_atomic(const std::filesystem::path& p, const std::string& content)
{
	auto tmp = p;
	tmp += ".tmp." + std::to_string(::getpid());
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if(!out) throw IoError("cannot write " + tmp.string());
		out.write(content.data(), static_cast<std::streamsize>(content.size()));
		out.flush();
		if(!out) throw IoError("write failed for " + tmp.string());
	}
	std::error_code ec;
	std::filesystem::rename(tmp, p, ec);
	if(ec) throw IoError("cannot rename " + tmp.string() + " to " + p.string() + ": " + ec.message());
}

std::uint32_t crc32_of(const std::string& bytes)
{
	return static_cast<std::uint32_t>(
		crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::uint32_t file_checksum(const std::string& bytes)
{
	if(bytes.size() >= 8 && bytes.compare(0, 4, "KLB1") == 0) return crc32_of(bytes.substr(0, bytes.size() - 4));
	return crc32_of(bytes);
}

std::string format_double(double v)
{
	if(std::isnan(v)) return "nan";
	if(std::isinf(v)) return v > 0 ? "inf" : "-inf";
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

std::vector<double> CsvTable::column(const std::string& name) const
{
	for(std::size_t c = 0; c < columns.size(); ++c) {
		if(columns[c] != name) continue;
		std::vector<double> out;
		out.reserve(rows.size());
		for(const auto& r : rows) out.push_back(r[c]);
		return out;
	}
	throw IoError("no column '" + name + "'");
}

std::string CsvTable::meta_value(const std::string& key) const
{
	for(const auto& [k, v] : meta)
		if(k == key) return v;
	return {};
}

std::string csv_string(const CsvTable& t)
{
	std::ostringstream o;
	for(const auto& [k, v] : t.meta) o << "# " << k << ": " << v << "\n";
	for(std::size_t c = 0; c < t.columns.size(); ++c) o << (c ? "," : "") << t.columns[c];
	o << "\n";
	for(const auto& r : t.rows) {
		if(r.size() != t.columns.size()) throw IoError("csv row width does not match header");
		for(std::size_t c = 0; c < r.size(); ++c) o << (c ? "," : "") << format_double(r[c]);
		o << "\n";
	}
	return o.str();
}

CsvTable parse_csv(const std::string& text)
{
	CsvTable t;
	std::istringstream in(text);
	std::string line;
	bool header = false;
	std::size_t line_no = 0;
	while(std::getline(in, line)) {
		++line_no;
		if(line.empty()) continue;
		if(line[0] == '#') {
			auto body = line.substr(1);
			if(!body.empty() && body[0] == ' ') body = body.substr(1);
			auto colon = body.find(": ");
			if(colon == std::string::npos) t.meta.emplace_back(body, "");
			else t.meta.emplace_back(body.substr(0, colon), body.substr(colon + 2));
			continue;
		}
		std::vector<std::string> cells;
		std::stringstream ss(line);
		std::string cell;
		while(std::getline(ss, cell, ',')) cells.push_back(cell);
		if(!header) {
			t.columns = cells;
			header = true;
			continue;
		}
		if(cells.size() != t.columns.size()) throw IoError("csv line " + std::to_string(line_no) + ": wrong width");
		std::vector<double> row;
		for(const auto& c : cells) {
			char* end = nullptr;
			double v = std::strtod(c.c_str(), &end);
			if(end == c.c_str() || *end != '\0') throw IoError("csv line " + std::to_string(line_no) + ": bad number '" + c + "'");
			row.push_back(v);
		}
		t.rows.push_back(std::move(row));
	}
	return t;
}

void write_csv(const std::filesystem::path& p, const CsvTable& t) { write_text_atomic(p, csv_string(t)); }
CsvTable read_csv(const std::filesystem::path& p) { return parse_csv(read_text(p)); }

std::uint64_t Klb1Array::count() const
{
	std::uint64_t n = 1;
	for(auto d : dims) n *= d;
	return n;
}

std::string klb1_bytes(const Klb1Array& a)
{
	if(a.count() != a.data.size()) throw IoError("KLB1: dims do not match payload size");
	std::string out = "KLB1";
	auto put = [&](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
	std::uint32_t rank = static_cast<std::uint32_t>(a.dims.size());
	put(&rank, 4);
	for(auto d : a.dims) put(&d, 8);
	put(a.data.data(), a.data.size() * 8);
	std::uint32_t crc = crc32_of(out);
	put(&crc, 4);
	return out;
}

Klb1Array parse_klb1(const std::string& b)
{
	if(b.size() < 12 || b.compare(0, 4, "KLB1") != 0) throw IoError("KLB1: bad magic");
	std::uint32_t crc;
	std::memcpy(&crc, b.data() + b.size() - 4, 4);
	if(crc32_of(b.substr(0, b.size() - 4)) != crc) throw IoError("KLB1: checksum mismatch");
	std::uint32_t rank;
	std::memcpy(&rank, b.data() + 4, 4);
	std::size_t pos = 8;
	if(b.size() < pos + 8 * static_cast<std::size_t>(rank) + 4) throw IoError("KLB1: truncated header");
	Klb1Array a;
	a.dims.resize(rank);
	for(auto& d : a.dims) {
		std::memcpy(&d, b.data() + pos, 8);
		pos += 8;
	}
	std::uint64_t n = a.count();
	if(b.size() != pos + 8 * n + 4) throw IoError("KLB1: payload size mismatch");
	a.data.resize(n);
	std::memcpy(a.data.data(), b.data() + pos, 8 * n);
	return a;
}

void write_klb1(const std::filesystem::path& p, const Klb1Array& a) { write_text_atomic(p, klb1_bytes(a)); }
Klb1Array read_klb1(const std::filesystem::path& p) { return parse_klb1(read_text(p)); }

} // namespace klein
