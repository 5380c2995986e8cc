#include "ace/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ace::io {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

long long parse_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("cannot parse " + what + " '" + text + "' as integer");
  }
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("cannot format real value");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("cannot parse '" + text + "' as a real number");
  }
  return v;
}

void write_schema(std::ostream& out, const FeatureSchema& schema) {
  for (const auto& f : schema.features()) {
    out << f.id << '\t' << f.name << '\t' << to_string(f.kind) << '\n';
  }
}

FeatureSchema read_schema(std::istream& in) {
  std::vector<FeatureSpec> specs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cols = split_ws(line);
    if (cols.size() != 3) {
      throw Error("schema line " + std::to_string(lineno) +
                  ": expected 'feature_id name kind'");
    }
    specs.push_back({static_cast<int>(parse_int(cols[0], "feature_id")), cols[1],
                     parse_feature_kind(cols[2])});
  }
  return FeatureSchema(std::move(specs));
}

void write_event_log(std::ostream& out, const FeatureSchema& schema,
                     const std::vector<SearchEvent>& events) {
  out << "day\tsession_id\tquery_id\tposition\tproduct_id\tlabel";
  for (const auto& f : schema.features()) out << '\t' << f.name;
  out << '\n';
  for (const auto& ev : events) {
    require_valid(validate_event(ev, schema));
    for (const auto& r : ev.results) {
      out << ev.day << '\t' << ev.session_id << '\t' << ev.query_id << '\t'
          << r.position << '\t' << r.product_id << '\t' << r.label;
      for (double v : r.features) out << '\t' << format_double(v);
      out << '\n';
    }
  }
}

std::vector<SearchEvent> read_event_log(std::istream& in,
                                        const FeatureSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw Error("event log: missing header line");
  const auto header = split(strip_cr(line), '\t');
  const std::size_t d = schema.size();
  if (header.size() != 6 + d) {
    throw Error("event log: header has " + std::to_string(header.size()) +
                " columns, expected " + std::to_string(6 + d));
  }
  for (std::size_t f = 0; f < d; ++f) {
    if (header[6 + f] != schema[f].name) {
      throw Error("event log: feature column '" + header[6 + f] +
                  "' does not match schema name '" + schema[f].name + "'");
    }
  }
  std::vector<SearchEvent> events;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 6 + d) {
      throw Error("event log line " + std::to_string(lineno) + ": expected " +
                  std::to_string(6 + d) + " columns");
    }
    const int day = static_cast<int>(parse_int(cols[0], "day"));
    if (events.empty() || events.back().day != day ||
        events.back().session_id != cols[1]) {
      events.push_back({day, cols[1], cols[2], {}});
    } else if (events.back().query_id != cols[2]) {
      throw Error("event log line " + std::to_string(lineno) +
                  ": query_id changes within session " + cols[1]);
    }
    ResultRecord r;
    r.position = static_cast<int>(parse_int(cols[3], "position"));
    r.product_id = cols[4];
    r.label = static_cast<int>(parse_int(cols[5], "label"));
    r.features.reserve(d);
    for (std::size_t f = 0; f < d; ++f) r.features.push_back(parse_double(cols[6 + f]));
    events.back().results.push_back(std::move(r));
  }
  for (const auto& ev : events) require_valid(validate_event(ev, schema));
  return events;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << "# dataset kind=" << to_string(dataset.kind) << " d=" << dataset.schema.size()
      << " schema=" << dataset.schema.digest() << '\n';
  for (const auto& inst : dataset.instances) {
    for (const auto& item : inst.items) {
      out << item.grade << " group:" << inst.group_key << " pid:" << item.product_id;
      for (std::size_t f = 0; f < item.features.size(); ++f) {
        const double v = item.features[f];
        if (v == 0.0 && !std::signbit(v)) continue;
        out << ' ' << f << ':' << format_double(v);
      }
      out << '\n';
    }
  }
}

Dataset read_dataset(std::istream& in, const FeatureSchema& schema) {
  Dataset ds;
  ds.schema = schema;
  std::string line;
  if (!std::getline(in, line)) throw Error("dataset: missing header line");
  {
    const auto toks = split_ws(strip_cr(line));
    if (toks.size() != 5 || toks[0] != "#" || toks[1] != "dataset") {
      throw Error("dataset: malformed header line");
    }
    if (toks[2].rfind("kind=", 0) != 0) throw Error("dataset: header lacks kind=");
    ds.kind = parse_dataset_kind(toks[2].substr(5));
    if (toks[4] != "schema=" + schema.digest()) {
      throw Error("dataset: schema digest mismatch (" + toks[4] + ")");
    }
  }
  const std::size_t d = schema.size();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto toks = split_ws(line);
    const std::string where = "dataset line " + std::to_string(lineno);
    if (toks.size() < 3 || toks[1].rfind("group:", 0) != 0 ||
        toks[2].rfind("pid:", 0) != 0) {
      throw Error(where + ": expected 'grade group:<key> pid:<id> ...'");
    }
    RankedItem item;
    item.grade = static_cast<int>(parse_int(toks[0], "grade"));
    item.product_id = toks[2].substr(4);
    item.features.assign(d, 0.0);
    for (std::size_t t = 3; t < toks.size(); ++t) {
      const auto colon = toks[t].find(':');
      if (colon == std::string::npos) throw Error(where + ": bad feature pair " + toks[t]);
      const auto fid = parse_int(toks[t].substr(0, colon), "feature_id");
      if (fid < 0 || static_cast<std::size_t>(fid) >= d) {
        throw Error(where + ": feature id " + std::to_string(fid) + " out of range");
      }
      item.features[fid] = parse_double(toks[t].substr(colon + 1));
    }
    const std::string key = toks[1].substr(6);
    if (ds.instances.empty() || ds.instances.back().group_key != key) {
      ds.instances.push_back({key, {}});
    }
    ds.instances.back().items.push_back(std::move(item));
  }
  require_valid(validate_dataset(ds));
  return ds;
}

void save_schema(const std::filesystem::path& path, const FeatureSchema& schema) {
  auto out = open_out(path);
  write_schema(out, schema);
}

FeatureSchema load_schema(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_schema(in);
}

void save_event_log(const std::filesystem::path& path, const FeatureSchema& schema,
                    const std::vector<SearchEvent>& events) {
  auto out = open_out(path);
  write_event_log(out, schema, events);
}

std::vector<SearchEvent> load_event_log(const std::filesystem::path& path,
                                        const FeatureSchema& schema) {
  auto in = open_in(path);
  return read_event_log(in, schema);
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_out(path);
  write_dataset(out, dataset);
}

Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  auto in = open_in(path);
  return read_dataset(in, schema);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ace::io
