#include "learn/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>

namespace learn {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "svg") return ReportFormat::svg;
  throw_config("InvalidParameter", "unknown report format '" + std::string(text) + "' (valid: csv, svg)");
}

std::string checkpoint_label(const ResultsRecord& r) {
  if (r.checkpoint_kind == CheckpointKind::seed) return std::to_string(r.cumulative_target) + "-shot";
  if (r.pool_size == 0) throw_data("SchemaMismatch", "label checkpoint record has pool_size 0");
  return fmt("%.2f", static_cast<double>(r.cumulative_target) / static_cast<double>(r.pool_size)) + "N";
}

ReportTable build_report_table(const std::vector<ResultsRecord>& records) {
  ReportTable t;
  for (const auto& r : records) {
    t.rows.push_back({r.algorithm, std::to_string(r.stage_index) + ":" + std::string(to_string(r.stage_kind)),
                      checkpoint_label(r), r.top1_accuracy});
  }
  return t;
}

std::string render_csv(const ReportTable& table) {
  std::string out = "algorithm,stage,checkpoint,accuracy\n";
  for (const auto& row : table.rows) {
    out += row.algorithm + "," + row.stage + "," + row.checkpoint + "," + fmt("%.4f", row.accuracy) + "\n";
  }
  return out;
}

std::string render_svg(const std::vector<ResultsRecord>& records) {
  constexpr double W = 640, H = 400, left = 60, right = 160, top = 30, bottom = 60;
  constexpr std::array<const char*, 6> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                                  "#9467bd", "#ff7f0e", "#17becf"};
  std::map<std::size_t, std::vector<const ResultsRecord*>> stages;
  std::size_t max_ckpt = 0;
  for (const auto& r : records) {
    stages[r.stage_index].push_back(&r);
    max_ckpt = std::max(max_ckpt, r.checkpoint_index);
  }
  std::vector<std::string> tick_labels(max_ckpt + 1);
  for (const auto& r : records) {
    if (tick_labels[r.checkpoint_index].empty()) tick_labels[r.checkpoint_index] = checkpoint_label(r);
  }

  const double plot_w = W - left - right, plot_h = H - top - bottom;
  auto x_of = [&](std::size_t i) {
    return left + (max_ckpt == 0 ? plot_w / 2 : plot_w * static_cast<double>(i) / static_cast<double>(max_ckpt));
  };
  auto y_of = [&](double acc) { return top + plot_h * (1.0 - std::clamp(acc, 0.0, 1.0)); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", left) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" +
       xml_escape(records.empty() ? std::string() : records.front().task) + " (" +
       xml_escape(records.empty() ? std::string() : records.front().algorithm) + ")</text>\n";
  // axes
  s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", top + plot_h) + "\" x2=\"" +
       fmt("%.1f", left + plot_w) + "\" y2=\"" + fmt("%.1f", top + plot_h) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", top) + "\" x2=\"" + fmt("%.1f", left) +
       "\" y2=\"" + fmt("%.1f", top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double acc = i / 4.0;
    s += "<text x=\"" + fmt("%.1f", left - 8) + "\" y=\"" + fmt("%.1f", y_of(acc) + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt("%.2f", acc) + "</text>\n";
  }
  for (std::size_t i = 0; i < tick_labels.size(); ++i) {
    s += "<text x=\"" + fmt("%.1f", x_of(i)) + "\" y=\"" + fmt("%.1f", top + plot_h + 18) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + xml_escape(tick_labels[i]) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", left + plot_w / 2) + "\" y=\"" + fmt("%.1f", H - 12) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">checkpoint</text>\n";

  std::size_t series = 0;
  for (const auto& [stage, recs] : stages) {
    const char* color = palette[series % palette.size()];
    std::string points;
    for (const auto* r : recs) {
      if (!points.empty()) points += ' ';
      points += fmt("%.2f", x_of(r->checkpoint_index)) + "," + fmt("%.2f", y_of(r->top1_accuracy));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + points +
         "\"/>\n";
    for (const auto* r : recs) {
      s += "<circle cx=\"" + fmt("%.2f", x_of(r->checkpoint_index)) + "\" cy=\"" + fmt("%.2f", y_of(r->top1_accuracy)) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(series);
    s += "<text x=\"" + fmt("%.1f", left + plot_w + 12) + "\" y=\"" + fmt("%.1f", ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">stage " + std::to_string(stage) +
         " (" + std::string(to_string(recs.front()->stage_kind)) + ")</text>\n";
    ++series;
  }
  s += "</svg>\n";
  return s;
}

std::string render_report(const std::vector<ResultsRecord>& records, ReportFormat format) {
  if (records.empty()) throw_data("EmptyResults", "no records to report");
  return format == ReportFormat::csv ? render_csv(build_report_table(records)) : render_svg(records);
}

}  // namespace learn
