#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tactile/map_pair.hpp"
#include "tactile/palette.hpp"

namespace tactile {

struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// Pixel confusion counts over the six feature classes. Background is not
// scored; its ground-truth count closes the pixel total.
struct ConfusionCounts {
  std::array<ClassCounts, kFeatureClassCount> per_class{};
  std::uint64_t gt_background = 0;
  std::uint64_t total_pixels = 0;

  const ClassCounts& operator[](ClassId id) const { return per_class[index_of(id)]; }
  ClassCounts& operator[](ClassId id) { return per_class[index_of(id)]; }
};

struct ClassScores {
  double iou = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
};

// Absent entries are N/A: the class appears in neither mask.
struct ImageMetrics {
  std::array<std::optional<ClassScores>, kFeatureClassCount> per_class{};
  const std::optional<ClassScores>& operator[](ClassId id) const {
    return per_class[index_of(id)];
  }
};

enum class Statistic { Median, Mean };
enum class Metric { IoU, F1, Precision, Recall };

inline constexpr std::array<Statistic, 2> kStatistics = {Statistic::Median, Statistic::Mean};
inline constexpr std::array<Metric, 4> kMetrics = {Metric::IoU, Metric::F1, Metric::Precision,
                                                   Metric::Recall};

std::string_view to_string(Statistic s) noexcept;
std::string_view to_string(Metric m) noexcept;

// Percentages (0..100, unrounded) per class x statistic x metric; nullopt is N/A.
class MetricTable {
 public:
  using Cell = std::optional<double>;

  Cell get(ClassId c, Statistic s, Metric m) const { return cells_[flat(c, s, m)]; }
  void set(ClassId c, Statistic s, Metric m, Cell v) { cells_[flat(c, s, m)] = v; }

  friend bool operator==(const MetricTable&, const MetricTable&) = default;

 private:
  static std::size_t flat(ClassId c, Statistic s, Metric m) {
    return (static_cast<std::size_t>(index_of(c)) * 2 + static_cast<std::size_t>(s)) * 4 +
           static_cast<std::size_t>(m);
  }
  std::array<Cell, kFeatureClassCount * 2 * 4> cells_{};
};

// Double-zoom vs single-zoom comparison; a single-model report leaves
// `single` and `diff` empty.
struct ReportTable {
  MetricTable primary;
  std::optional<MetricTable> single;
  std::optional<MetricTable> diff;
  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

ConfusionCounts confusion(const ClassMask& gt, const ClassMask& pred);
ImageMetrics class_metrics(const ConfusionCounts& counts);
ClassScores scores_from_counts(const ClassCounts& c);

// Median (midpoint of the two central values for even counts) or mean over
// the images where a class is present. Throws on an empty list.
MetricTable aggregate(const std::vector<ImageMetrics>& per_image);

// Cellwise double - single with N/A propagation.
ReportTable diff_table(const MetricTable& double_zoom, const MetricTable& single_zoom);

struct RunEvaluation {
  ModelId model;
  std::vector<ImageMetrics> per_image;
  MetricTable table;
};

// Refuses (ErrorKind::IncompatibleZoom) any pair whose zoom the model may
// not be tested on.
RunEvaluation evaluate_run(ModelId model, const std::vector<MapPair>& pairs,
                           const std::vector<RgbImage>& predictions,
                           const ClassPalette& palette);

enum class ReportFormat { Csv, Markdown };

// Cells rounded to one decimal; N/A literal for missing cells.
std::string render_report(const ReportTable& table, ReportFormat format);
// Inverse of the CSV rendering.
ReportTable parse_report_csv(std::string_view text);

// One JSON record per class x statistic, full precision.
std::string render_metrics_records(const MetricTable& table, std::string_view model,
                                   std::string_view test_set);
MetricTable parse_metrics_records(std::string_view text);
void write_metrics_file(const std::filesystem::path& path, const MetricTable& table,
                        std::string_view model, std::string_view test_set);
MetricTable read_metrics_file(const std::filesystem::path& path);

std::string format_cell(const MetricTable::Cell& cell);

}  // namespace tactile
