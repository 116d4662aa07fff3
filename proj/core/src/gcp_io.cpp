#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spdgeom/atomic_file.hpp"
#include "spdgeom/gcp.hpp"

static_assert(std::endian::native == std::endian::little,
              "f64bin serialization assumes a little-endian host");

namespace spdgeom {

namespace {

constexpr char kMagic[5] = {'S', 'P', 'D', 'F', '1'};

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ParseError("load_features: bad numeric field '" + tok + "' at line " +
                         std::to_string(line),
                     line);
  if (!std::isfinite(v))
    throw ParseError("load_features: non-finite value at line " + std::to_string(line), line);
  return v;
}

long parse_long(const std::string& tok, std::size_t line) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError("load_features: bad integer field '" + tok + "' at line " +
                         std::to_string(line),
                     line);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

void save_csv(const std::string& path, const Dataset& ds) {
  AtomicFile file(path, std::ios::out | std::ios::trunc);
  std::ofstream& out = file.stream();
  out << ds.dim << ',' << ds.positions << ',' << ds.num_classes << '\n';
  for (const FeatureSample& s : ds.samples) {
    out << s.label;
    const auto& data = s.x.data();
    for (double v : data) out << ',' << format_double(v);
    out << '\n';
  }
  file.commit();
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError("load_features: empty file", 1);
  ++lineno;
  const auto header = split_csv_line(line);
  if (header.size() != 3)
    throw ParseError("load_features: header must be 'd,N,C'", lineno);
  Dataset ds;
  ds.dim = static_cast<int>(parse_long(header[0], lineno));
  ds.positions = static_cast<int>(parse_long(header[1], lineno));
  ds.num_classes = static_cast<int>(parse_long(header[2], lineno));
  if (ds.dim <= 0 || ds.positions < 2 || ds.num_classes <= 0)
    throw ParseError("load_features: invalid header dimensions", lineno);

  const std::size_t expected = 1 + static_cast<std::size_t>(ds.dim) * ds.positions;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected)
      throw ParseError("load_features: expected " + std::to_string(expected) +
                           " fields, got " + std::to_string(fields.size()) + " at line " +
                           std::to_string(lineno),
                       lineno);
    FeatureSample s;
    s.label = static_cast<int>(parse_long(fields[0], lineno));
    if (s.label < 0 || s.label >= ds.num_classes)
      throw ParseError("load_features: label out of range at line " + std::to_string(lineno),
                       lineno);
    std::vector<double> data(expected - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) data[i - 1] = parse_double(fields[i], lineno);
    s.x = Matrix(ds.dim, ds.positions, std::move(data));
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in, std::size_t& offset) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw ParseError("load_features: truncated file at offset " + std::to_string(offset), offset);
  offset += sizeof(v);
  return v;
}

void save_f64bin(const std::string& path, const Dataset& ds) {
  AtomicFile file(path, std::ios::out | std::ios::trunc | std::ios::binary);
  std::ofstream& out = file.stream();
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, static_cast<std::uint32_t>(ds.dim));
  write_u32(out, static_cast<std::uint32_t>(ds.positions));
  write_u32(out, static_cast<std::uint32_t>(ds.num_classes));
  write_u32(out, static_cast<std::uint32_t>(ds.samples.size()));
  for (const FeatureSample& s : ds.samples) {
    write_u32(out, static_cast<std::uint32_t>(s.label));
    const auto& data = s.x.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  file.commit();
}

Dataset load_f64bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::size_t offset = 0;
  char magic[5];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("load_features: missing SPDF1 magic", 0);
  offset += sizeof(magic);

  Dataset ds;
  ds.dim = static_cast<int>(read_u32(in, offset));
  ds.positions = static_cast<int>(read_u32(in, offset));
  ds.num_classes = static_cast<int>(read_u32(in, offset));
  const std::uint32_t count = read_u32(in, offset);
  if (ds.dim <= 0 || ds.positions < 2 || ds.num_classes <= 0)
    throw ParseError("load_features: invalid binary header", offset);

  const std::size_t values = static_cast<std::size_t>(ds.dim) * ds.positions;
  ds.samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureSample s;
    s.label = static_cast<int>(read_u32(in, offset));
    std::vector<double> data(values);
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(values * sizeof(double))))
      throw ParseError("load_features: truncated sample payload at offset " +
                           std::to_string(offset),
                       offset);
    offset += values * sizeof(double);
    for (double v : data)
      if (!std::isfinite(v))
        throw ParseError("load_features: non-finite value at offset " + std::to_string(offset),
                         offset);
    s.x = Matrix(ds.dim, ds.positions, std::move(data));
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

}  // namespace

void save_features(const std::string& path, const Dataset& ds, FeatureFormat format) {
  ds.validate();
  if (format == FeatureFormat::Csv)
    save_csv(path, ds);
  else
    save_f64bin(path, ds);
}

Dataset load_features(const std::string& path, FeatureFormat format) {
  return format == FeatureFormat::Csv ? load_csv(path) : load_f64bin(path);
}

Dataset load_features_auto(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error("cannot open '" + path + "'");
  char magic[5] = {};
  probe.read(magic, sizeof(magic));
  probe.close();
  const bool binary = std::memcmp(magic, kMagic, sizeof(kMagic)) == 0;
  return load_features(path, binary ? FeatureFormat::F64Bin : FeatureFormat::Csv);
}

std::string RunRecord::to_json() const {
  std::ostringstream out;
  out << "{\n";
  out << "  \"schema\": \"spdgeom.run_record.v1\",\n";
  out << "  \"seed\": " << seed << ",\n";
  out << "  \"config\": {\n";
  out << "    \"head\": \"" << head_kind_name(config.head.kind) << "\",\n";
  out << "    \"theta\": " << format_double(config.head.theta) << ",\n";
  out << "    \"newton_schulz\": " << (config.head.use_newton_schulz ? "true" : "false") << ",\n";
  out << "    \"epochs\": " << config.epochs << ",\n";
  out << "    \"batch_size\": " << config.batch_size << ",\n";
  out << "    \"lr\": " << format_double(config.sgd.lr) << ",\n";
  out << "    \"classifier_factor\": " << format_double(config.sgd.classifier_factor) << ",\n";
  out << "    \"weight_decay\": " << format_double(config.weight_decay) << ",\n";
  out << "    \"eps_reg\": " << (config.eps_reg ? format_double(*config.eps_reg) : "null") << ",\n";
  out << "    \"lr_schedule\": [";
  for (std::size_t i = 0; i < config.lr_schedule.size(); ++i) {
    if (i) out << ", ";
    out << "[" << config.lr_schedule[i].first << ", "
        << format_double(config.lr_schedule[i].second) << "]";
  }
  out << "]\n  },\n";
  out << "  \"epochs\": [\n";
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const EpochStats& e = epochs[i];
    out << "    {\"train_loss\": " << format_double(e.train_loss)
        << ", \"train_top1\": " << format_double(e.train_top1)
        << ", \"train_top5\": " << format_double(e.train_top5)
        << ", \"val_top1\": " << format_double(e.val_top1)
        << ", \"val_top5\": " << format_double(e.val_top5) << "}"
        << (i + 1 < epochs.size() ? "," : "") << "\n";
  }
  out << "  ],\n";
  out << "  \"wall_time_seconds\": " << format_double(wall_seconds) << "\n";
  out << "}\n";
  return out.str();
}

}  // namespace spdgeom
