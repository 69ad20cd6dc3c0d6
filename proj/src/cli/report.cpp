#include "ptmaml/cli/report.hpp"

#include <cstdio>
#include <sstream>

#include "ptmaml/cli/pipeline.hpp"

namespace ptmaml::cli {

using nlohmann::json;

std::string RunSummary::label() const {
  return std::string(meta::mode_name(report.mode)) + "-" + std::string(learner::loss_name(report.loss));
}

const meta::Metrics* RunSummary::headline() const {
  if (report.mode == meta::Mode::PtMaml && test_adapted) return &*test_adapted;
  if (test_plain) return &*test_plain;
  return test_adapted ? &*test_adapted : nullptr;
}

void check_fingerprints(const std::vector<RunSummary>& runs) {
  for (const auto& r : runs) {
    if (r.report.fingerprint != runs.front().report.fingerprint) {
      throw CommandError("mismatch",
                         "runs " + runs.front().label() + " and " + r.label() + " were trained on different data",
                         {{"runs", {runs.front().label(), r.label()}},
                          {"fingerprints", {runs.front().report.fingerprint, r.report.fingerprint}}});
    }
  }
}

namespace {

constexpr learner::LossKind kLosses[] = {learner::LossKind::Pointer, learner::LossKind::Max, learner::LossKind::Sum};

const RunSummary* find(const std::vector<RunSummary>& runs, meta::Mode m, learner::LossKind k) {
  for (const auto& r : runs) {
    if (r.report.mode == m && r.report.loss == k) return &r;
  }
  return nullptr;
}

std::string row_name(meta::Mode m, learner::LossKind k) {
  std::string loss(learner::loss_name(k));
  loss[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(loss[0])));
  return (m == meta::Mode::PtMaml ? "Meta + " : "") + loss + " loss";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

json comparison_json(const std::vector<RunSummary>& runs) {
  json rows = json::array();
  for (auto m : {meta::Mode::Baseline, meta::Mode::PtMaml}) {
    for (auto k : kLosses) {
      json row = {{"row", row_name(m, k)}, {"mode", meta::mode_name(m)}, {"loss", learner::loss_name(k)}};
      const RunSummary* r = find(runs, m, k);
      const meta::Metrics* h = r ? r->headline() : nullptr;
      row["test_acc_lf"] = h ? json(h->acc_lf) : json(nullptr);
      row["test_acc_ex"] = h ? json(h->acc_ex) : json(nullptr);
      row["dev_acc_lf"] = r ? json(r->report.best_dev_acc_lf) : json(nullptr);
      row["best_epoch"] = r ? json(r->report.best_epoch) : json(nullptr);
      rows.push_back(row);
    }
  }
  return {{"fingerprint", runs.empty() ? 0 : runs.front().report.fingerprint}, {"rows", rows}};
}

std::string comparison_text(const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-20s %10s %10s %10s %6s\n", "", "dev_lf", "test_lf", "test_ex", "best");
  out << line;
  const json table = comparison_json(runs);
  for (const auto& row : table.at("rows")) {
    auto cell = [&](const char* key) {
      return row.at(key).is_null() ? std::string("-") : fmt(row.at(key).get<double>());
    };
    std::snprintf(line, sizeof line, "%-20s %10s %10s %10s %6s\n", row.at("row").get<std::string>().c_str(),
                  cell("dev_acc_lf").c_str(), cell("test_acc_lf").c_str(), cell("test_acc_ex").c_str(),
                  row.at("best_epoch").is_null() ? "-" : std::to_string(row.at("best_epoch").get<int>()).c_str());
    out << line;
  }
  return out.str();
}

std::string curves_csv(const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  out << "run,mode,loss,seed,epoch,train_loss,train_acc_lf,dev_acc_lf,dev_acc_ex,dev_acc_lf_adapted\n";
  for (const auto& r : runs) {
    for (const auto& e : r.report.epochs) {
      out << r.label() << ',' << meta::mode_name(r.report.mode) << ',' << learner::loss_name(r.report.loss) << ','
          << r.report.seed << ',' << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.train_acc_lf) << ','
          << fmt(e.dev_acc_lf) << ',' << fmt(e.dev_acc_ex) << ','
          << (e.dev_acc_lf_adapted ? fmt(*e.dev_acc_lf_adapted) : "") << '\n';
    }
  }
  return out.str();
}

std::string per_length_csv(const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  out << "run,length,count,acc_lf\n";
  for (const auto& r : runs) {
    const meta::Metrics* h = r.headline();
    if (!h) continue;
    for (const auto& [len, b] : h->per_length) out << r.label() << ',' << len << ',' << b.count << ',' << fmt(b.acc()) << '\n';
  }
  return out.str();
}

json metrics_delta(const meta::Metrics& a, const meta::Metrics& b) {
  json per = json::object();
  for (const auto& [len, bb] : b.per_length) {
    auto it = a.per_length.find(len);
    if (it != a.per_length.end()) per[std::to_string(len)] = bb.acc() - it->second.acc();
  }
  return {{"acc_lf", b.acc_lf - a.acc_lf}, {"acc_ex", b.acc_ex - a.acc_ex}, {"per_length", per}};
}

} // namespace ptmaml::cli
