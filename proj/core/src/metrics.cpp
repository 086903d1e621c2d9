#include "sfisep/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <nlohmann/json.hpp>

#include "sfisep/errors.hpp"

namespace sfisep {

namespace {

constexpr double kCapDb = 100.0;
constexpr double kEigenDrop = 1e-12;  // relative eigenvalue cutoff in the Gram solve

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double ratio_db(double num, double den) {
  if (num <= 0) return -kCapDb;
  if (den <= 0) return kCapDb;
  const double db = 10.0 * std::log10(num / den);
  return std::min(kCapDb, std::max(-kCapDb, db));
}

std::vector<double> flatten(const AudioBuffer& x) {
  x.check_rectangular();
  std::vector<double> out;
  out.reserve(x.channel_count() * x.sample_count());
  for (const auto& ch : x.channels) out.insert(out.end(), ch.begin(), ch.end());
  return out;
}

// Least-squares coefficients c solving G c = rhs for the symmetric 2x2 Gram
// matrix, via its eigendecomposition with small eigenvalues discarded.
void gram_solve(double g_ss, double g_sn, double g_nn, double rhs_s, double rhs_n, double& c_s,
                double& c_n) {
  const double tr = g_ss + g_nn;
  const double det_part = std::sqrt(std::max(0.0, (g_ss - g_nn) * (g_ss - g_nn) / 4.0 + g_sn * g_sn));
  const double l1 = tr / 2.0 + det_part;
  const double l2 = tr / 2.0 - det_part;
  const double cutoff = kEigenDrop * std::max(std::abs(l1), std::abs(l2));

  // eigenvector for l1; the second is its quarter turn
  double v1x, v1y;
  if (std::abs(g_sn) > 0) {
    v1x = l1 - g_nn;
    v1y = g_sn;
  } else if (g_ss >= g_nn) {
    v1x = 1;
    v1y = 0;
  } else {
    v1x = 0;
    v1y = 1;
  }
  const double norm = std::sqrt(v1x * v1x + v1y * v1y);
  v1x /= norm;
  v1y /= norm;
  const double v2x = -v1y, v2y = v1x;

  c_s = 0;
  c_n = 0;
  if (std::abs(l1) > cutoff) {
    const double proj = (v1x * rhs_s + v1y * rhs_n) / l1;
    c_s += proj * v1x;
    c_n += proj * v1y;
  }
  if (std::abs(l2) > cutoff) {
    const double proj = (v2x * rhs_s + v2y * rhs_n) / l2;
    c_s += proj * v2x;
    c_n += proj * v2y;
  }
}

ColumnStats column_stats(const std::vector<ItemMetrics>& items, double SiMetrics::*field,
                         SiMetrics ItemMetrics::*group) {
  ColumnStats stats;
  if (items.empty()) return stats;
  double sum = 0;
  for (const ItemMetrics& item : items) sum += (item.*group).*field;
  stats.mean = sum / items.size();
  double var = 0;
  for (const ItemMetrics& item : items) {
    const double d = (item.*group).*field - stats.mean;
    var += d * d;
  }
  stats.stddev = std::sqrt(var / items.size());
  return stats;
}

nlohmann::ordered_json metrics_json(const SiMetrics& m) {
  return {{"si_sdr", m.si_sdr}, {"si_sir", m.si_sir}, {"si_sar", m.si_sar}};
}

nlohmann::ordered_json stats_json(const ColumnStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}};
}

}  // namespace

SiMetrics si_decompose(const std::vector<double>& estimate, const std::vector<double>& target,
                       const std::vector<double>& interference) {
  require(estimate.size() == target.size() && target.size() == interference.size(),
          ErrorCode::invalid_argument, "signal lengths differ");
  require(!estimate.empty(), ErrorCode::invalid_argument, "empty signals");

  const double g_ss = dot(target, target);
  require(g_ss > 0, ErrorCode::undefined_metric, "silent target reference");
  const double g_sn = dot(target, interference);
  const double g_nn = dot(interference, interference);
  const double rhs_s = dot(target, estimate);
  const double rhs_n = dot(interference, estimate);

  const double scale_t = rhs_s / g_ss;
  double c_s, c_n;
  gram_solve(g_ss, g_sn, g_nn, rhs_s, rhs_n, c_s, c_n);

  const std::size_t n = estimate.size();
  double e_target = 0, e_dist = 0, e_interf = 0, e_artif = 0, e_ti = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s_t = scale_t * target[i];
    const double proj = c_s * target[i] + c_n * interference[i];
    const double e_i = proj - s_t;
    const double e_a = estimate[i] - proj;
    e_target += s_t * s_t;
    e_dist += (estimate[i] - s_t) * (estimate[i] - s_t);
    e_interf += e_i * e_i;
    e_artif += e_a * e_a;
    e_ti += (s_t + e_i) * (s_t + e_i);
  }

  SiMetrics out;
  out.si_sdr = ratio_db(e_target, e_dist);
  out.si_sir = ratio_db(e_target, e_interf);
  out.si_sar = ratio_db(e_ti, e_artif);
  return out;
}

SiMetrics si_decompose(const AudioBuffer& estimate, const AudioBuffer& target,
                       const AudioBuffer& interference) {
  return si_decompose(flatten(estimate), flatten(target), flatten(interference));
}

MetricReport evaluate_items(const std::vector<EvalItem>& items) {
  MetricReport report;
  for (const EvalItem& item : items) {
    try {
      ItemMetrics m;
      m.name = item.name;
      m.processed = si_decompose(item.estimate, item.foreground, item.background);
      m.unprocessed = si_decompose(item.mixture, item.foreground, item.background);
      m.delta.si_sdr = m.processed.si_sdr - m.unprocessed.si_sdr;
      m.delta.si_sir = m.processed.si_sir - m.unprocessed.si_sir;
      m.delta.si_sar = m.processed.si_sar - m.unprocessed.si_sar;
      report.items.push_back(std::move(m));
    } catch (const Error& e) {
      report.skipped.emplace_back(item.name, e.what());
    }
  }
  require(!report.items.empty(), ErrorCode::invalid_argument, "no evaluable items");

  report.processed_sdr = column_stats(report.items, &SiMetrics::si_sdr, &ItemMetrics::processed);
  report.processed_sir = column_stats(report.items, &SiMetrics::si_sir, &ItemMetrics::processed);
  report.processed_sar = column_stats(report.items, &SiMetrics::si_sar, &ItemMetrics::processed);
  report.unprocessed_sdr =
      column_stats(report.items, &SiMetrics::si_sdr, &ItemMetrics::unprocessed);
  report.unprocessed_sir =
      column_stats(report.items, &SiMetrics::si_sir, &ItemMetrics::unprocessed);
  report.unprocessed_sar =
      column_stats(report.items, &SiMetrics::si_sar, &ItemMetrics::unprocessed);
  report.delta_sdr = column_stats(report.items, &SiMetrics::si_sdr, &ItemMetrics::delta);
  report.delta_sir = column_stats(report.items, &SiMetrics::si_sir, &ItemMetrics::delta);
  report.delta_sar = column_stats(report.items, &SiMetrics::si_sar, &ItemMetrics::delta);
  return report;
}

std::string report_text(const MetricReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %10s %10s %10s %10s %10s %10s\n", "item", "SI-SDR",
                "SI-SIR", "SI-SAR", "dSI-SDR", "dSI-SIR", "mix SDR");
  out += line;
  for (const ItemMetrics& m : report.items) {
    std::snprintf(line, sizeof(line), "%-16s %10.2f %10.2f %10.2f %10.2f %10.2f %10.2f\n",
                  m.name.c_str(), m.processed.si_sdr, m.processed.si_sir, m.processed.si_sar,
                  m.delta.si_sdr, m.delta.si_sir, m.unprocessed.si_sdr);
    out += line;
  }
  std::snprintf(line, sizeof(line),
                "mean+-std        dSI-SDR %.2f+-%.2f  dSI-SIR %.2f+-%.2f  SI-SAR %.2f+-%.2f  "
                "mix SI-SDR %.2f+-%.2f\n",
                report.delta_sdr.mean, report.delta_sdr.stddev, report.delta_sir.mean,
                report.delta_sir.stddev, report.processed_sar.mean, report.processed_sar.stddev,
                report.unprocessed_sdr.mean, report.unprocessed_sdr.stddev);
  out += line;
  for (const auto& [name, reason] : report.skipped) out += "skipped " + name + ": " + reason + "\n";
  return out;
}

std::string report_json(const MetricReport& report) {
  nlohmann::ordered_json doc;
  doc["items"] = nlohmann::ordered_json::array();
  for (const ItemMetrics& m : report.items) {
    nlohmann::ordered_json item;
    item["name"] = m.name;
    item["processed"] = metrics_json(m.processed);
    item["unprocessed"] = metrics_json(m.unprocessed);
    item["delta"] = metrics_json(m.delta);
    doc["items"].push_back(item);
  }
  doc["skipped"] = nlohmann::ordered_json::array();
  for (const auto& [name, reason] : report.skipped)
    doc["skipped"].push_back({{"name", name}, {"reason", reason}});
  doc["aggregate"] = {{"processed",
                       {{"si_sdr", stats_json(report.processed_sdr)},
                        {"si_sir", stats_json(report.processed_sir)},
                        {"si_sar", stats_json(report.processed_sar)}}},
                      {"unprocessed",
                       {{"si_sdr", stats_json(report.unprocessed_sdr)},
                        {"si_sir", stats_json(report.unprocessed_sir)},
                        {"si_sar", stats_json(report.unprocessed_sar)}}},
                      {"delta",
                       {{"si_sdr", stats_json(report.delta_sdr)},
                        {"si_sir", stats_json(report.delta_sir)},
                        {"si_sar", stats_json(report.delta_sar)}}}};
  return doc.dump(2) + "\n";
}

}  // namespace sfisep
