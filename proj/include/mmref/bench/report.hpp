#pragma once

// Table rendering of an evaluation report: one table per decision mode, rows
// are variants, columns time / accuracy (and attempts in multi-attempt mode).

#include <optional>
#include <string>
#include <string_view>

#include "mmref/bench/evaluate.hpp"

namespace mmref::bench {

enum class ReportFormat { markdown, csv };

std::optional<ReportFormat> parse_report_format(std::string_view s);

std::string render_markdown(const EvalReport& r);
/// Header row: mode,variant,mean_time_s,std_time_s,accuracy_pct,std_accuracy_pct,mean_attempts
std::string render_csv(const EvalReport& r);
std::string render(const EvalReport& r, ReportFormat f);

}  // namespace mmref::bench
