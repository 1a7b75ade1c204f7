#include "tactile/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"

namespace tactile {

std::string_view to_string(Statistic s) noexcept {
  return s == Statistic::Median ? "median" : "mean";
}

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::IoU: return "IoU";
    case Metric::F1: return "F1";
    case Metric::Precision: return "Precision";
    case Metric::Recall: return "Recall";
  }
  return "IoU";
}

ConfusionCounts confusion(const ClassMask& gt, const ClassMask& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw Error(ErrorKind::Shape, "confusion: ground truth is " + std::to_string(gt.width()) +
                                      "x" + std::to_string(gt.height()) + " but prediction is " +
                                      std::to_string(pred.width()) + "x" +
                                      std::to_string(pred.height()));
  }
  ConfusionCounts out;
  out.total_pixels = gt.size();
  const auto& g = gt.labels();
  const auto& p = pred.labels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const ClassId a = g[i];
    const ClassId b = p[i];
    if (a == ClassId::Background) {
      ++out.gt_background;
    }
    if (a == b) {
      if (a != ClassId::Background) ++out[a].tp;
      continue;
    }
    if (a != ClassId::Background) ++out[a].fn;
    if (b != ClassId::Background) ++out[b].fp;
  }
  return out;
}

ClassScores scores_from_counts(const ClassCounts& c) {
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  ClassScores s;
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  // 2tp/(2tp+fp+fn) equals 2PR/(P+R) and keeps IoU = F1/(2-F1) exact.
  s.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  s.iou = ratio(tp, tp + fp + fn);
  return s;
}

ImageMetrics class_metrics(const ConfusionCounts& counts) {
  ImageMetrics out;
  for (ClassId id : kFeatureClasses) {
    const auto& c = counts[id];
    if (c.tp + c.fp + c.fn == 0) continue;
    out.per_class[index_of(id)] = scores_from_counts(c);
  }
  return out;
}

namespace {

double metric_value(const ClassScores& s, Metric m) {
  switch (m) {
    case Metric::IoU: return s.iou;
    case Metric::F1: return s.f1;
    case Metric::Precision: return s.precision;
    case Metric::Recall: return s.recall;
  }
  return 0;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

MetricTable aggregate(const std::vector<ImageMetrics>& per_image) {
  if (per_image.empty()) throw Error(ErrorKind::Config, "aggregate: no images to aggregate");
  MetricTable table;
  for (ClassId id : kFeatureClasses) {
    for (Metric m : kMetrics) {
      std::vector<double> values;
      for (const auto& im : per_image) {
        if (const auto& s = im[id]) values.push_back(metric_value(*s, m));
      }
      if (values.empty()) continue;
      table.set(id, Statistic::Median, m, 100.0 * median_of(values));
      table.set(id, Statistic::Mean, m, 100.0 * mean_of(values));
    }
  }
  return table;
}

ReportTable diff_table(const MetricTable& double_zoom, const MetricTable& single_zoom) {
  MetricTable diff;
  for (ClassId id : kFeatureClasses) {
    for (Statistic s : kStatistics) {
      for (Metric m : kMetrics) {
        const auto a = double_zoom.get(id, s, m);
        const auto b = single_zoom.get(id, s, m);
        if (a && b) diff.set(id, s, m, *a - *b);
      }
    }
  }
  return ReportTable{double_zoom, single_zoom, diff};
}

RunEvaluation evaluate_run(ModelId model, const std::vector<MapPair>& pairs,
                           const std::vector<RgbImage>& predictions,
                           const ClassPalette& palette) {
  if (pairs.size() != predictions.size()) {
    throw Error(ErrorKind::Config, "evaluate_run: " + std::to_string(pairs.size()) +
                                       " pairs but " + std::to_string(predictions.size()) +
                                       " predictions");
  }
  for (const auto& p : pairs) {
    if (!zoom_compatible(model, p.zoom)) {
      throw Error(ErrorKind::IncompatibleZoom,
                  "incompatible zoom: the " + std::string(to_string(model)) +
                      " model is only tested on its trained zooms and zooms with the same "
                      "building visibility; pair `" + p.id + "` is at zoom " +
                      std::to_string(p.zoom));
    }
  }
  if (pairs.empty()) throw Error(ErrorKind::Config, "evaluate_run: empty test set");
  RunEvaluation out{model, std::vector<ImageMetrics>(pairs.size()), {}};
  const auto n = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const auto gt = segment_image(pairs[i].tactile, palette);
    const auto pred = segment_image(predictions[i], palette);
    out.per_image[i] = class_metrics(confusion(gt, pred));
  }
  out.table = aggregate(out.per_image);
  return out;
}

std::string format_cell(const MetricTable::Cell& cell) {
  if (!cell) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *cell);
  std::string s(buf);
  if (s == "-0.0") s = "0.0";
  return s;
}

namespace {

MetricTable::Cell parse_cell(std::string_view text) {
  const std::string t = trim(text);
  if (t == "N/A") return std::nullopt;
  return parse_double("cell", t);
}

std::vector<std::string> split_on(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string render_report(const ReportTable& table, ReportFormat format) {
  const bool comparison = table.single.has_value() && table.diff.has_value();
  std::vector<std::string> header = {"Class", "Statistic"};
  for (Metric m : kMetrics) {
    if (comparison) {
      for (std::string_view col : {"Double", "Single", "Diff"}) {
        header.push_back(std::string(to_string(m)) + " " + std::string(col));
      }
    } else {
      header.emplace_back(to_string(m));
    }
  }
  std::vector<std::vector<std::string>> rows;
  for (ClassId id : kFeatureClasses) {
    for (Statistic s : kStatistics) {
      std::vector<std::string> row = {std::string(class_name(id)), std::string(to_string(s))};
      for (Metric m : kMetrics) {
        row.push_back(format_cell(table.primary.get(id, s, m)));
        if (comparison) {
          row.push_back(format_cell(table.single->get(id, s, m)));
          row.push_back(format_cell(table.diff->get(id, s, m)));
        }
      }
      rows.push_back(std::move(row));
    }
  }

  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    if (format == ReportFormat::Csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
    } else {
      out += '|';
      for (const auto& c : cells) out += " " + c + " |";
    }
    out += '\n';
  };
  emit(header);
  if (format == ReportFormat::Markdown) {
    std::vector<std::string> rule(header.size(), "---");
    emit(rule);
  }
  for (const auto& r : rows) emit(r);
  return out;
}

ReportTable parse_report_csv(std::string_view text) {
  std::vector<std::string> lines;
  for (auto& l : split_on(text, '\n')) {
    auto t = trim(l);
    if (!t.empty()) lines.push_back(t);
  }
  if (lines.empty()) throw Error(ErrorKind::Format, "report: empty input");
  const auto header = split_on(lines.front(), ',');
  const bool comparison = header.size() == 2 + 4 * 3;
  if (!comparison && header.size() != 2 + 4) {
    throw Error(ErrorKind::Format, "report: unexpected column count " +
                                       std::to_string(header.size()));
  }
  ReportTable out;
  if (comparison) {
    out.single = MetricTable{};
    out.diff = MetricTable{};
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_on(lines[li], ',');
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::Format, "report: row " + std::to_string(li) + " has " +
                                         std::to_string(cells.size()) + " cells");
    }
    const auto id = class_from_name(cells[0]);
    if (!id || *id == ClassId::Background) {
      throw Error(ErrorKind::Format, "report: unknown class `" + cells[0] + "`");
    }
    Statistic s;
    if (cells[1] == "median") s = Statistic::Median;
    else if (cells[1] == "mean") s = Statistic::Mean;
    else throw Error(ErrorKind::Format, "report: unknown statistic `" + cells[1] + "`");
    std::size_t col = 2;
    for (Metric m : kMetrics) {
      out.primary.set(*id, s, m, parse_cell(cells[col++]));
      if (comparison) {
        out.single->set(*id, s, m, parse_cell(cells[col++]));
        out.diff->set(*id, s, m, parse_cell(cells[col++]));
      }
    }
  }
  return out;
}

std::string render_metrics_records(const MetricTable& table, std::string_view model,
                                   std::string_view test_set) {
  std::string out;
  for (ClassId id : kFeatureClasses) {
    for (Statistic s : kStatistics) {
      nlohmann::ordered_json rec;
      rec["model"] = model;
      rec["test_set"] = test_set;
      rec["class"] = class_name(id);
      rec["statistic"] = to_string(s);
      for (Metric m : kMetrics) {
        const auto cell = table.get(id, s, m);
        const std::string key = to_lower(to_string(m));
        if (cell) rec[key] = *cell;
        else rec[key] = nullptr;
      }
      out += rec.dump();
      out += '\n';
    }
  }
  return out;
}

MetricTable parse_metrics_records(std::string_view text) {
  MetricTable table;
  std::size_t records = 0;
  for (const auto& line : split_on(text, '\n')) {
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      const auto id = class_from_name(rec.at("class").get<std::string>());
      if (!id || *id == ClassId::Background) throw Error(ErrorKind::Format, "unknown class");
      const auto stat_name = rec.at("statistic").get<std::string>();
      const Statistic s = stat_name == "median" ? Statistic::Median : Statistic::Mean;
      if (stat_name != "median" && stat_name != "mean") {
        throw Error(ErrorKind::Format, "unknown statistic " + stat_name);
      }
      for (Metric m : kMetrics) {
        const auto& v = rec.at(to_lower(to_string(m)));
        table.set(*id, s, m, v.is_null() ? MetricTable::Cell{} : v.get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, std::string("metrics record: ") + e.what());
    }
    ++records;
  }
  if (records != kFeatureClassCount * 2) {
    throw Error(ErrorKind::Format, "metrics file holds " + std::to_string(records) +
                                       " records, expected 12");
  }
  return table;
}

void write_metrics_file(const std::filesystem::path& path, const MetricTable& table,
                        std::string_view model, std::string_view test_set) {
  write_text_file(path, render_metrics_records(table, model, test_set));
}

MetricTable read_metrics_file(const std::filesystem::path& path) {
  return parse_metrics_records(read_text_file(path));
}

}  // namespace tactile
