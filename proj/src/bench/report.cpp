#include "tabood/bench/report.hpp"

#include "tabood/data/io.hpp"
#include "tabood/error.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace tabood::bench {

using nlohmann::json;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' || c == '\r' ? ' ' : c;
  }
  return out + "\"";
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v + 0.0);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metric_title(const std::string& m) {
  if (m == "auroc") return "AUROC";
  if (m == "fpr95") return "FPR@95";
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("raw metrics: bad number '" + s + "'");
  }
}

void require_rows(const BenchReport& r) {
  if (r.rows.empty()) throw InvalidArgument("report: no rows");
}

}  // namespace

const ReportRow* BenchReport::find(const std::string& model, const std::string& detector, const std::string& split,
                                   const std::string& metric) const {
  for (const auto& row : rows)
    if (row.model == model && row.detector == detector && row.split == split && row.metric == metric) return &row;
  return nullptr;
}

std::string emit_csv(const BenchReport& report) {
  require_rows(report);
  std::string out = "model,detector,split,metric,mean,std,n,status,message\n";
  for (const auto& row : report.rows) {
    out += csv_field(row.model) + ',' + csv_field(row.detector) + ',' + csv_field(row.split) + ',' + row.metric + ',';
    if (row.ok())
      out += fixed1(100.0 * row.summary.mean) + ',' + fixed1(100.0 * row.summary.stddev) + ',' +
             std::to_string(row.summary.count) + ",ok,\n";
    else
      out += ",," + std::to_string(row.values.size()) + ",error," + csv_field(row.error) + '\n';
  }
  return out;
}

std::string emit_markdown(const BenchReport& report) {
  require_rows(report);
  std::string out;
  for (const auto& md : report.layout) {
    for (const auto& metric : report.metrics) {
      out += "### " + md.model + " / " + metric_title(metric) + "\n\n| Detector |";
      for (const auto& s : report.splits) out += ' ' + s + " |";
      out += "\n|---|";
      for (std::size_t i = 0; i < report.splits.size(); ++i) out += "---|";
      out += '\n';
      for (const auto& det : md.detectors) {
        out += "| " + det + " |";
        for (const auto& s : report.splits) {
          const ReportRow* row = report.find(md.model, det, s, metric);
          out += ' ';
          out += !row ? "-" : row->ok() ? eval::format_percent(row->summary) : "error";
          out += " |";
        }
        out += '\n';
      }
      out += '\n';
    }
  }
  std::vector<const ReportRow*> errors;
  for (const auto& row : report.rows)
    if (!row.ok()) errors.push_back(&row);
  if (!errors.empty()) {
    out += "### Errors\n\n";
    for (const auto* row : errors)
      out += "- " + row->model + " / " + row->detector + " / " + row->split + " / " + row->metric + ": " +
             row->error + '\n';
    out += '\n';
  }
  if (report.provenance.contains("standardization"))
    out += "Features: " + report.provenance["standardization"].get<std::string>() + "\n";
  return out;
}

std::string emit(const BenchReport& report, const std::string& format) {
  if (format == "csv") return emit_csv(report);
  if (format == "markdown" || format == "md") return emit_markdown(report);
  throw InvalidArgument("report: unknown format '" + format + "'");
}

void write_raw(const BenchReport& report, const std::filesystem::path& raw_dir) {
  std::error_code ec;
  std::filesystem::create_directories(raw_dir, ec);
  if (ec) throw IoError("cannot create " + raw_dir.string());
  json layout = json::array();
  for (const auto& md : report.layout) layout.push_back({{"model", md.model}, {"detectors", md.detectors}});
  const json meta = {{"layout", layout},
                     {"splits", report.splits},
                     {"metrics", report.metrics},
                     {"provenance", report.provenance}};
  write_text(raw_dir / "meta.json", meta.dump(2) + "\n");

  std::string metrics = "model,detector,split,metric,repeat,value,error\n";
  for (const auto& row : report.rows) {
    const std::string key = csv_field(row.model) + ',' + csv_field(row.detector) + ',' + csv_field(row.split) + ',' +
                            row.metric + ',';
    for (std::size_t r = 0; r < row.values.size(); ++r) metrics += key + std::to_string(r) + ',' + exact(row.values[r]) + ",\n";
    if (!row.ok()) metrics += key + ",," + csv_field(row.error) + '\n';
  }
  write_text(raw_dir / "metrics.csv", metrics);

  std::string pf = "model,detector,split,metric,repeat,slot,feature,value\n";
  for (const auto& f : report.per_feature)
    pf += csv_field(f.model) + ',' + csv_field(f.detector) + ',' + csv_field(f.split) + ',' + f.metric + ',' +
          std::to_string(f.repeat) + ',' + std::to_string(f.slot) + ',' + std::to_string(f.feature) + ',' +
          exact(f.value) + '\n';
  write_text(raw_dir / "per_feature.csv", pf);

  if (!report.scores.empty()) {
    std::string s = "model,detector,split,repeat,set,index,score\n";
    for (const auto& d : report.scores)
      for (std::size_t i = 0; i < d.scores.size(); ++i)
        s += csv_field(d.model) + ',' + csv_field(d.detector) + ',' + csv_field(d.split) + ',' +
             std::to_string(d.repeat) + ',' + d.set + ',' + std::to_string(i) + ',' + exact(d.scores[i]) + '\n';
    write_text(raw_dir / "scores.csv", s);
  }
}

void write_report(const BenchReport& report, const std::filesystem::path& dir) {
  require_rows(report);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  write_text(dir / "report.csv", emit_csv(report));
  write_text(dir / "report.md", emit_markdown(report));
  write_text(dir / "provenance.json", report.provenance.dump(2) + "\n");
  write_raw(report, dir / "raw");
}

BenchReport read_raw(const std::filesystem::path& raw_dir) {
  BenchReport report;
  json meta;
  try {
    meta = json::parse(read_text(raw_dir / "meta.json"));
    for (const auto& md : meta.at("layout"))
      report.layout.push_back({md.at("model").get<std::string>(), md.at("detectors").get<std::vector<std::string>>()});
    report.splits = meta.at("splits").get<std::vector<std::string>>();
    report.metrics = meta.at("metrics").get<std::vector<std::string>>();
    report.provenance = meta.at("provenance");
  } catch (const json::exception& e) {
    throw IoError(std::string("raw meta.json: ") + e.what());
  }

  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, ReportRow> cells;
  const data::CsvTable metrics = data::parse_csv(read_text(raw_dir / "metrics.csv"));
  const std::size_t cm = metrics.column("model"), cd = metrics.column("detector"), cs = metrics.column("split"),
                    cmet = metrics.column("metric"), cv = metrics.column("value"), ce = metrics.column("error");
  for (const auto& line : metrics.rows) {
    ReportRow& row = cells[{line[cm], line[cd], line[cs], line[cmet]}];
    if (!line[ce].empty())
      row.error = line[ce];
    else
      row.values.push_back(parse_double(line[cv]));
  }
  for (const auto& md : report.layout)
    for (const auto& det : md.detectors)
      for (const auto& split : report.splits)
        for (const auto& metric : report.metrics) {
          auto it = cells.find({md.model, det, split, metric});
          ReportRow row;
          if (it != cells.end()) row = it->second;
          else row.error = "missing from raw metrics";
          row.model = md.model;
          row.detector = det;
          row.split = split;
          row.metric = metric;
          if (row.ok() && row.values.empty()) row.error = "no values";
          if (row.ok()) row.summary = eval::summarize(row.values, metric);
          report.rows.push_back(std::move(row));
        }

  const data::CsvTable pf = data::parse_csv(read_text(raw_dir / "per_feature.csv"));
  if (!pf.header.empty()) {
    const std::size_t m = pf.column("model"), d = pf.column("detector"), s = pf.column("split"),
                      mt = pf.column("metric"), r = pf.column("repeat"), sl = pf.column("slot"),
                      f = pf.column("feature"), v = pf.column("value");
    for (const auto& line : pf.rows)
      report.per_feature.push_back({line[m], line[d], line[s], line[mt], std::stoul(line[r]), std::stoul(line[sl]),
                                    std::stoul(line[f]), parse_double(line[v])});
  }
  return report;
}

}  // namespace tabood::bench
