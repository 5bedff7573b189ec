#include "ajd/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ajd {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'E', 'T'};
constexpr std::size_t kHeaderBytes = 16;

void append_u32_le(std::string& buf, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void append_f64_le(std::string& buf, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return v;
}

double read_f64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read from '" + path + "' failed");
  return std::move(buf).str();
}

std::string header_and_payload(int n, int p) {
  std::string buf;
  buf.reserve(kHeaderBytes +
              8 * static_cast<std::size_t>(n) * static_cast<std::size_t>(p) * p);
  buf.append(kMagic, 4);
  append_u32_le(buf, kMatSetFormatVersion);
  append_u32_le(buf, static_cast<std::uint32_t>(n));
  append_u32_le(buf, static_cast<std::uint32_t>(p));
  return buf;
}

std::string format_double(double v) {
  char tmp[64];
  std::snprintf(tmp, sizeof(tmp), "%.17g", v);
  return tmp;
}

}  // namespace

void save_matrices(const std::string& path, const std::vector<Matrix>& mats) {
  if (mats.empty()) throw std::invalid_argument("nothing to save");
  const int p = static_cast<int>(mats.front().rows());
  std::string buf = header_and_payload(static_cast<int>(mats.size()), p);
  for (const Matrix& m : mats) {
    if (m.rows() != p || m.cols() != p) {
      throw std::invalid_argument("matrices in a set must share dimensions");
    }
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) append_f64_le(buf, m(r, c));
  }
  write_file(path, buf);
}

std::vector<Matrix> load_matrices(const std::string& path) {
  const std::string content = read_file(path);
  if (content.size() < kHeaderBytes) {
    throw std::runtime_error("'" + path + "' is truncated (no MSET header)");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(content.data());
  if (std::memcmp(bytes, kMagic, 4) != 0) {
    throw std::runtime_error("'" + path + "' is not an MSET file");
  }
  const std::uint32_t version = read_u32_le(bytes + 4);
  if (version != kMatSetFormatVersion) {
    throw std::runtime_error("'" + path + "' has unsupported MSET version " +
                             std::to_string(version));
  }
  const std::uint32_t n = read_u32_le(bytes + 8);
  const std::uint32_t p = read_u32_le(bytes + 12);
  if (n < 1 || p < 1) {
    throw std::runtime_error("'" + path + "' has a corrupt MSET header");
  }
  const std::size_t expected =
      kHeaderBytes + 8 * static_cast<std::size_t>(n) * p * p;
  if (content.size() != expected) {
    throw std::runtime_error(
        "'" + path + "' has " + std::to_string(content.size()) +
        " bytes, expected " + std::to_string(expected) +
        " (truncated or trailing data)");
  }

  std::vector<Matrix> mats(n, Matrix(p, p));
  const unsigned char* cursor = bytes + kHeaderBytes;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t r = 0; r < p; ++r)
      for (std::uint32_t c = 0; c < p; ++c, cursor += 8)
        mats[i](r, c) = read_f64_le(cursor);
  }
  return mats;
}

void save_matset(const std::string& path, const SymmetricMatrixSet& cset) {
  std::string buf = header_and_payload(cset.size(), cset.dim());
  for (double v : cset.raw()) append_f64_le(buf, v);
  write_file(path, buf);
}

SymmetricMatrixSet load_matset(const std::string& path) {
  std::vector<Matrix> mats = load_matrices(path);
  const int p = static_cast<int>(mats.front().rows());
  std::vector<double> data;
  data.reserve(mats.size() * static_cast<std::size_t>(p) * p);
  for (const Matrix& m : mats)
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) data.push_back(m(r, c));
  return SymmetricMatrixSet::FromRaw(static_cast<int>(mats.size()), p,
                                     std::move(data));
}

void save_trace(const std::string& path, const SolverTrace& trace,
                const TraceMetadata& meta) {
  std::string buf;
  buf += "# ajd trace v1\n";
  buf += "# method: " + meta.method + "\n";
  buf += "# n: " + std::to_string(meta.n) + "\n";
  buf += "# p: " + std::to_string(meta.p) + "\n";
  if (meta.sigma) buf += "# sigma: " + format_double(*meta.sigma) + "\n";
  if (meta.seed) buf += "# seed: " + std::to_string(*meta.seed) + "\n";
  buf += "# status: " + meta.status + "\n";
  if (!meta.generator.empty()) buf += "# generator: " + meta.generator + "\n";
  buf += "# version: " + meta.version + "\n";
  buf += "# init_time_s: " + format_double(meta.init_time_s) + "\n";
  buf += "# initial_loss: " + format_double(trace.initial_loss) + "\n";
  buf += "# initial_grad_norm: " + format_double(trace.initial_grad_norm) + "\n";
  buf += "iter,loss,grad_norm,step_size,halvings,wall_time_s\n";
  for (const TraceRecord& rec : trace.records) {
    buf += std::to_string(rec.iter) + "," + format_double(rec.loss) + "," +
           format_double(rec.grad_norm) + "," + format_double(rec.step_size) +
           "," + std::to_string(rec.halvings) + "," +
           format_double(rec.wall_time_s) + "\n";
  }
  write_file(path, buf);
}

TraceData load_trace(const std::string& path) {
  std::istringstream in(read_file(path));
  TraceData data;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      const auto trim = [](std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t\r");
        s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
      };
      trim(key);
      trim(value);
      if (key == "method") data.meta.method = value;
      else if (key == "status") data.meta.status = value;
      else if (key == "generator") data.meta.generator = value;
      else if (key == "version") data.meta.version = value;
      else if (key == "n") data.meta.n = std::stoi(value);
      else if (key == "p") data.meta.p = std::stoi(value);
      else if (key == "sigma") data.meta.sigma = std::stod(value);
      else if (key == "seed") data.meta.seed = std::stoull(value);
      else if (key == "init_time_s") data.meta.init_time_s = std::stod(value);
      else if (key == "initial_loss") data.meta.initial_loss = std::stod(value);
      else if (key == "initial_grad_norm")
        data.meta.initial_grad_norm = std::stod(value);
      continue;
    }
    if (!header_seen) {
      if (line.rfind("iter,", 0) != 0) {
        throw std::runtime_error("'" + path + "' is not an ajd trace file");
      }
      header_seen = true;
      continue;
    }
    TraceRecord rec;
    std::istringstream row(line);
    std::string field;
    const auto next = [&]() {
      if (!std::getline(row, field, ',')) {
        throw std::runtime_error("'" + path + "' has a malformed trace row");
      }
      return field;
    };
    rec.iter = std::stoi(next());
    rec.loss = std::stod(next());
    rec.grad_norm = std::stod(next());
    rec.step_size = std::stod(next());
    rec.halvings = std::stoi(next());
    rec.wall_time_s = std::stod(next());
    data.records.push_back(rec);
  }
  if (!header_seen) {
    throw std::runtime_error("'" + path + "' is not an ajd trace file");
  }
  return data;
}

}  // namespace ajd
