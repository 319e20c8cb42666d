#include "subharmonic/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "subharmonic/errors.hpp"

namespace subharmonic {

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path p(path);
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp.string() + "'");
    f.write(contents.data(), std::streamsize(contents.size()));
    f.flush();
    if (!f) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

struct Writer {
  std::string out;
  void u8(unsigned v) { out.push_back(char(v & 0xff)); }
  void u16(std::uint16_t v) { for (int k = 0; k < 2; ++k) u8(v >> (8 * k)); }
  void u32(std::uint32_t v) { for (int k = 0; k < 4; ++k) u8(v >> (8 * k)); }
  void u64(std::uint64_t v) { for (int k = 0; k < 8; ++k) u8(unsigned(v >> (8 * k))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) { out += s; }
};

struct Reader {
  const std::string& in;
  std::size_t pos = 0;
  void need(std::size_t n) {
    if (pos + n > in.size()) throw IoError("truncated binary record");
  }
  unsigned u8() {
    need(1);
    return static_cast<unsigned char>(in[pos++]);
  }
  std::uint64_t uint(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int k = 0; k < n; ++k) v |= std::uint64_t(static_cast<unsigned char>(in[pos + k])) << (8 * k);
    pos += n;
    return v;
  }
  std::uint32_t u32() { return std::uint32_t(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = in.substr(pos, n);
    pos += n;
    return s;
  }
};

void header(Writer& w, unsigned kind, const std::string& meta) {
  w.bytes("TRPL");
  w.u8(kBinaryVersion);
  w.u8(kind);
  w.u16(0);
  w.u32(std::uint32_t(meta.size()));
  w.bytes(meta);
}

void read_header(Reader& r, unsigned kind, std::string* meta) {
  if (r.bytes(4) != "TRPL") throw IoError("bad magic: not a TRPL file");
  unsigned v = r.u8();
  if (v != kBinaryVersion) throw IoError("unsupported TRPL version " + std::to_string(v));
  unsigned k = r.u8();
  if (k != kind) throw IoError("TRPL record kind " + std::to_string(k) + ", expected " + std::to_string(kind));
  r.uint(2);
  std::string m = r.bytes(r.u32());
  if (meta) *meta = m;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<double>> parse_rows(const std::string& text, std::size_t cols, std::vector<std::string>* comments) {
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (comments) comments->push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("line " + std::to_string(lineno) + ": cannot parse '" + cell + "'");
      }
    }
    if (row.size() != cols) throw IoError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " columns");
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw IoError("CSV header row missing");
  return rows;
}

}  // namespace

std::string comment_block(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out += "# " + line + "\n";
  return out;
}

std::string trajectory_to_binary(const Trajectory& t, const std::string& meta) {
  Writer w;
  header(w, 1, meta);
  w.f64(t.dt);
  w.u64(t.record_every);
  w.f64(t.B2_abs);
  w.f64(t.phiB);
  w.u8(t.seed ? 1 : 0);
  w.u64(t.seed.value_or(0));
  w.u64(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    w.f64(t.a1[k].real());
    w.f64(t.a1[k].imag());
    w.f64(t.a2[k].real());
    w.f64(t.a2[k].imag());
  }
  return w.out;
}

Trajectory trajectory_from_binary(const std::string& bytes, std::string* meta) {
  Reader r{bytes};
  read_header(r, 1, meta);
  Trajectory t;
  t.dt = r.f64();
  t.record_every = r.u64();
  t.B2_abs = r.f64();
  t.phiB = r.f64();
  bool has_seed = r.u8() != 0;
  std::uint64_t seed = r.u64();
  if (has_seed) t.seed = seed;
  std::uint64_t n = r.u64();
  r.need(n * 32);
  t.a1.resize(n);
  t.a2.resize(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    double a = r.f64(), b = r.f64(), c = r.f64(), d = r.f64();
    t.a1[k] = {a, b};
    t.a2[k] = {c, d};
  }
  if (r.pos != bytes.size()) throw IoError("trailing bytes after trajectory record");
  return t;
}

std::string histogram_to_binary(const Histogram2D& h, const std::string& meta) {
  Writer w;
  header(w, 2, meta);
  w.f64(h.fs);
  w.u32(std::uint32_t(h.units.size()));
  w.bytes(h.units);
  w.u32(std::uint32_t(h.i_edges.size()));
  for (double e : h.i_edges) w.f64(e);
  w.u32(std::uint32_t(h.q_edges.size()));
  for (double e : h.q_edges) w.f64(e);
  for (auto c : h.counts) w.u64(c);
  return w.out;
}

Histogram2D histogram_from_binary(const std::string& bytes, std::string* meta) {
  Reader r{bytes};
  read_header(r, 2, meta);
  Histogram2D h;
  h.fs = r.f64();
  h.units = r.bytes(r.u32());
  std::uint32_t ni = r.u32();
  for (std::uint32_t k = 0; k < ni; ++k) h.i_edges.push_back(r.f64());
  std::uint32_t nq = r.u32();
  for (std::uint32_t k = 0; k < nq; ++k) h.q_edges.push_back(r.f64());
  if (ni < 2 || nq < 2) throw IoError("histogram needs at least one bin per axis");
  h.counts.resize(std::size_t(ni - 1) * (nq - 1));
  for (auto& c : h.counts) c = r.u64();
  if (r.pos != bytes.size()) throw IoError("trailing bytes after histogram record");
  return h;
}

std::string trajectory_to_csv(const Trajectory& t, const std::string& meta) {
  std::string out = comment_block(meta);
  out += "# sample_interval_s=" + num(t.sample_interval()) + " B2_abs=" + num(t.B2_abs) + " phiB=" + num(t.phiB) + "\n";
  out += "t[s],re_a1[sqrt_photons],im_a1[sqrt_photons],re_a2[sqrt_photons],im_a2[sqrt_photons]\n";
  const double ds = t.sample_interval();
  for (std::size_t k = 0; k < t.size(); ++k)
    out += num(ds * double(k + 1)) + "," + num(t.a1[k].real()) + "," + num(t.a1[k].imag()) + "," +
           num(t.a2[k].real()) + "," + num(t.a2[k].imag()) + "\n";
  return out;
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::vector<std::string> comments;
  auto rows = parse_rows(text, 5, &comments);
  Trajectory t;
  for (const auto& c : comments) {
    std::istringstream ss(c);
    std::string tok;
    while (ss >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string k = tok.substr(0, eq);
      double v = std::atof(tok.c_str() + eq + 1);
      if (k == "sample_interval_s") t.dt = v;
      if (k == "B2_abs") t.B2_abs = v;
      if (k == "phiB") t.phiB = v;
    }
  }
  if (!(t.dt > 0) && rows.size() >= 2) t.dt = rows[1][0] - rows[0][0];
  for (const auto& r : rows) {
    t.a1.push_back({r[1], r[2]});
    t.a2.push_back({r[3], r[4]});
  }
  return t;
}

std::string histogram_to_csv(const Histogram2D& h, const std::string& meta) {
  std::string out = comment_block(meta);
  out += "# fs_hz=" + num(h.fs) + " window_s=" + num(h.window()) + " units=" + h.units + "\n";
  const std::string u = "[" + h.units + "]";
  out += "i_lo" + u + ",i_hi" + u + ",q_lo" + u + ",q_hi" + u + ",count\n";
  for (std::size_t i = 0; i < h.ni(); ++i)
    for (std::size_t q = 0; q < h.nq(); ++q)
      out += num(h.i_edges[i]) + "," + num(h.i_edges[i + 1]) + "," + num(h.q_edges[q]) + "," +
             num(h.q_edges[q + 1]) + "," + std::to_string(h.at(i, q)) + "\n";
  return out;
}

Histogram2D histogram_from_csv(const std::string& text) {
  std::vector<std::string> comments;
  auto rows = parse_rows(text, 5, &comments);
  Histogram2D h;
  for (const auto& c : comments) {
    std::istringstream ss(c);
    std::string tok;
    while (ss >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
      if (k == "fs_hz") h.fs = std::atof(v.c_str());
      if (k == "units") h.units = v;
    }
  }
  if (rows.empty()) throw IoError("histogram CSV has no bins");
  std::vector<double> ie, qe;
  // rows are I-major: the Q edges repeat for every I bin
  for (const auto& r : rows) {
    if (r[0] != rows[0][0]) break;
    if (qe.empty()) qe.push_back(r[2]);
    qe.push_back(r[3]);
  }
  ie.clear();
  for (std::size_t k = 0; k < rows.size(); k += qe.size() - 1) {
    if (ie.empty()) ie.push_back(rows[k][0]);
    ie.push_back(rows[k][1]);
  }
  h.i_edges = ie;
  h.q_edges = qe;
  if (rows.size() != h.ni() * h.nq()) throw IoError("histogram CSV is not a full grid");
  for (const auto& r : rows) h.counts.push_back(static_cast<std::uint64_t>(r[4]));
  return h;
}

}  // namespace subharmonic
