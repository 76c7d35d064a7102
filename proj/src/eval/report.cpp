#include "adaptms/eval/report.hpp"

#include "adaptms/util/float_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace adaptms::eval {

namespace {

void push_unique(std::vector<std::string>& out, const std::string& s) {
  if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

AggregateCell aggregate_rows(const std::vector<const ReportRow*>& rows) {
  AggregateCell cell;
  cell.variant = rows.front()->variant;
  cell.setting = rows.front()->setting;
  cell.seeds = rows.size();
  std::vector<double> r, m, d;
  for (const auto* row : rows) {
    r.push_back(row->rmse);
    m.push_back(row->mae);
    if (!std::isnan(row->disc_accuracy)) d.push_back(row->disc_accuracy);
  }
  cell.rmse = mean_sd(r);
  cell.mae = mean_sd(m);
  cell.disc_accuracy = d.empty() ? MeanSd{std::nan(""), std::nan("")} : mean_sd(d);
  return cell;
}

std::string num(double v) { return std::isnan(v) ? std::string() : util::format_double(v); }

nlohmann::json moments(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

}  // namespace

void EvalReport::add(ReportRow row) { rows.push_back(std::move(row)); }

std::vector<std::string> EvalReport::variants() const {
  std::vector<std::string> out;
  for (const auto& r : rows) push_unique(out, r.variant);
  return out;
}

std::vector<std::string> EvalReport::settings() const {
  std::vector<std::string> out;
  for (const auto& r : rows) push_unique(out, r.setting);
  return out;
}

std::vector<AggregateCell> EvalReport::aggregate() const {
  std::vector<AggregateCell> out;
  for (const auto& v : variants()) {
    for (const auto& s : settings()) {
      std::vector<const ReportRow*> cell;
      for (const auto& r : rows) {
        if (r.variant == v && r.setting == s) cell.push_back(&r);
      }
      if (!cell.empty()) out.push_back(aggregate_rows(cell));
    }
  }
  return out;
}

AggregateCell EvalReport::cell(const std::string& variant, const std::string& setting) const {
  std::vector<const ReportRow*> cell;
  for (const auto& r : rows) {
    if (r.variant == variant && r.setting == setting) cell.push_back(&r);
  }
  if (cell.empty()) throw std::out_of_range("report " + name + ": no cell (" + variant + ", " + setting + ")");
  return aggregate_rows(cell);
}

void EvalReport::validate() const {
  for (const auto& r : rows) {
    if (!(r.mae >= 0.0) || !(r.rmse >= r.mae)) {
      throw std::logic_error("report " + name + ": cell (" + r.variant + ", " + r.setting + ", seed " +
                             std::to_string(r.seed) + ") violates RMSE >= MAE >= 0");
    }
  }
}

std::string to_csv(const EvalReport& report) {
  std::string out = "report,protocol,variant,setting,seed,rmse,mae,disc_accuracy,config_fingerprint,corpus_hash\n";
  auto line = [&](const std::string& variant, const std::string& setting, const std::string& seed,
                  const std::string& rmse, const std::string& mae, const std::string& disc) {
    out += report.name + ',' + report.protocol + ',' + variant + ',' + setting + ',' + seed + ',' + rmse + ',' +
           mae + ',' + disc + ',' + report.config_fingerprint + ',' + report.corpus_hash + '\n';
  };
  for (const auto& r : report.rows) {
    line(r.variant, r.setting, std::to_string(r.seed), num(r.rmse), num(r.mae), num(r.disc_accuracy));
  }
  for (const auto& g : report.gains) {
    line("relative_gain(" + g.baseline + "->" + g.model + ")", g.setting, "mean", num(g.gain), "", "");
  }
  return out;
}

std::string to_json(const EvalReport& report) {
  nlohmann::json variants = nlohmann::json::object();
  for (const auto& cell : report.aggregate()) {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& r : report.rows) {
      if (r.variant != cell.variant || r.setting != cell.setting) continue;
      nlohmann::json s = {{"seed", r.seed}, {"rmse", r.rmse}, {"mae", r.mae}};
      if (!std::isnan(r.disc_accuracy)) s["disc_accuracy"] = r.disc_accuracy;
      seeds.push_back(std::move(s));
    }
    nlohmann::json entry = {{"rmse", moments(cell.rmse)}, {"mae", moments(cell.mae)}, {"seeds", std::move(seeds)}};
    if (!std::isnan(cell.disc_accuracy.mean)) entry["disc_accuracy"] = moments(cell.disc_accuracy);
    variants[cell.variant][cell.setting] = std::move(entry);
  }
  nlohmann::json gains = nlohmann::json::array();
  for (const auto& g : report.gains) {
    gains.push_back({{"setting", g.setting}, {"baseline", g.baseline}, {"model", g.model}, {"gain", g.gain}});
  }
  nlohmann::json j = {{"report", report.name},
                      {"protocol", report.protocol},
                      {"config_fingerprint", report.config_fingerprint},
                      {"corpus_hash", report.corpus_hash},
                      {"columns", report.settings()},
                      {"variant_order", report.variants()},
                      {"variants", std::move(variants)},
                      {"relative_gains", std::move(gains)},
                      {"notes", report.notes}};
  return j.dump(2) + "\n";
}

std::string format_table(const EvalReport& report) {
  const auto cols = report.settings();
  std::size_t width = 8;
  for (const auto& v : report.variants()) width = std::max(width, v.size());
  std::string out = report.name + " (RMSE mean +/- sd over seeds)\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), "variant");
  out += buf;
  for (const auto& c : cols) {
    std::snprintf(buf, sizeof buf, "  %17s", c.c_str());
    out += buf;
  }
  out += '\n';
  for (const auto& v : report.variants()) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), v.c_str());
    out += buf;
    for (const auto& c : cols) {
      bool found = false;
      for (const auto& r : report.rows) found = found || (r.variant == v && r.setting == c);
      if (found) {
        const auto cell = report.cell(v, c);
        std::snprintf(buf, sizeof buf, "  %8.4f +/- %.4f", cell.rmse.mean, cell.rmse.sd);
      } else {
        std::snprintf(buf, sizeof buf, "  %17s", "-");
      }
      out += buf;
    }
    out += '\n';
  }
  for (const auto& g : report.gains) {
    std::snprintf(buf, sizeof buf, "relative gain %s (%s vs %s): %.3f\n", g.setting.c_str(), g.model.c_str(),
                  g.baseline.c_str(), g.gain);
    out += buf;
  }
  for (const auto& n : report.notes) out += "note: " + n + '\n';
  return out;
}

}  // namespace adaptms::eval
