#include "mmref/bench/report.hpp"

#include <cstdio>
#include <sstream>

namespace mmref::bench {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string mode_title(filter::FilterMode m) {
  return m == filter::FilterMode::first_attempt ? "First attempt" : "Multiple attempts";
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  return std::nullopt;
}

std::string render_markdown(const EvalReport& r) {
  std::ostringstream out;
  out << "# Evaluation report\n\nSeed: " << r.seed << "\n";
  for (const auto& m : r.modes) {
    const bool multi = m.mode == filter::FilterMode::multi_attempt;
    out << "\n## " << mode_title(m.mode) << "\n\n";
    out << "| Model | Time (s) | Accuracy (%) |" << (multi ? " Attempts |" : "") << "\n";
    out << "|---|---|---|" << (multi ? "---|" : "") << "\n";
    for (const auto& v : m.variants) {
      out << "| " << to_string(v.variant) << " | " << fixed(v.mean_time_s, 2) << " ± " << fixed(v.std_time_s, 2)
          << " | " << fixed(v.accuracy_pct, 2) << " ± " << fixed(v.std_accuracy_pct, 2) << " |";
      if (multi) out << " " << fixed(v.mean_attempts, 2) << " |";
      out << "\n";
    }
    if (!m.tests.empty()) {
      out << "\nPaired one-tailed t-tests over participants:\n\n";
      out << "| Baseline | Candidate | Metric | Mean delta | t | df | p |\n|---|---|---|---|---|---|---|\n";
      for (const auto& t : m.tests)
        out << "| " << to_string(t.baseline) << " | " << to_string(t.candidate) << " | " << t.metric << " | "
            << fixed(t.mean_delta, 3) << " | " << (t.t ? fixed(*t.t, 3) : std::string("n/a")) << " | " << t.n - 1
            << " | " << fixed(t.p_one_tailed, 4) << " |\n";
    }
  }
  if (!r.timing_patterns.empty()) {
    out << "\n## Dominant intentional timing patterns\n\n";
    out << "T_speech - T_event in seconds; n/a marks a modality absent from the pattern.\n\n";
    out << "| Weight | Head | Left hand | Right hand |\n|---|---|---|---|\n";
    for (const auto& p : r.timing_patterns) {
      out << "| " << fixed(p.at("weight").get<double>(), 3);
      for (int a = 0; a < 3; ++a) {
        const auto& mu = p.at("mean_s")[a];
        const auto& sd = p.at("std_s")[a];
        out << " | " << (mu.is_null() ? std::string("n/a")
                                      : fixed(mu.get<double>(), 2) + " ± " + fixed(sd.get<double>(), 2));
      }
      out << " |\n";
    }
  }
  out << "\nMax belief normalization error: " << r.max_normalization_error << "\n";
  return out.str();
}

std::string render_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "mode,variant,mean_time_s,std_time_s,accuracy_pct,std_accuracy_pct,mean_attempts\n";
  for (const auto& m : r.modes)
    for (const auto& v : m.variants)
      out << filter::to_string(m.mode) << ',' << to_string(v.variant) << ',' << fixed(v.mean_time_s, 6) << ','
          << fixed(v.std_time_s, 6) << ',' << fixed(v.accuracy_pct, 6) << ',' << fixed(v.std_accuracy_pct, 6) << ','
          << fixed(v.mean_attempts, 6) << '\n';
  return out.str();
}

std::string render(const EvalReport& r, ReportFormat f) {
  return f == ReportFormat::markdown ? render_markdown(r) : render_csv(r);
}

}  // namespace mmref::bench
