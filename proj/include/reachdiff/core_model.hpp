#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reachdiff {

// Target position in meters. Home position is the origin; x is lateral
// (midline = 0, positive right), y is forward, z is height above the table.
struct ReachTarget {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const ReachTarget&, const ReachTarget&) = default;
};

enum class Cue : std::uint8_t { kMove = 0, kOk = 1, kReach = 2, kNow = 3 };

inline constexpr std::size_t kNumCues = 4;
inline constexpr std::array<Cue, kNumCues> kAllCues = {Cue::kMove, Cue::kOk, Cue::kReach,
                                                       Cue::kNow};

// Lowercase wire name ("move", "ok", "reach", "now").
std::string_view cue_name(Cue cue);

// Case-sensitive inverse of cue_name. Throws ValidationError otherwise.
Cue parse_cue(std::string_view text);

enum class Condition : std::uint8_t { kControl = 0, kTreated = 1 };

struct ReachRecord {
  std::string participant_id;
  int session = 1;
  int trial = 0;
  ReachTarget target;
  Cue cue = Cue::kMove;
  double time_s = 1.0;
  Condition condition = Condition::kControl;

  bool treated() const { return condition == Condition::kTreated; }

  friend bool operator==(const ReachRecord&, const ReachRecord&) = default;
};

// Throws ValidationError if a ReachRecord invariant is broken.
void validate(const ReachRecord& record);

// Column layout of the featurized exercise descriptor.
namespace feature {
inline constexpr std::size_t kX = 0;
inline constexpr std::size_t kY = 1;
inline constexpr std::size_t kZ = 2;
inline constexpr std::size_t kXSquared = 3;
inline constexpr std::size_t kDistHome = 4;
inline constexpr std::size_t kCueFirst = 5;
inline constexpr std::size_t kCount = 9;
}  // namespace feature

using FeatureVector = std::array<double, feature::kCount>;

// Human-readable column names: x, y, z, x², dist_home, cue=move, ...
std::string_view feature_name(std::size_t index);

// [x, y, z, x², |target|, one-hot cue]. Throws ValidationError on non-finite input.
FeatureVector featurize(const ReachTarget& target, Cue cue);
inline FeatureVector featurize(const ReachRecord& r) { return featurize(r.target, r.cue); }

// Dense row-major matrix of learner inputs.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Learner input: features, outcome, and binary treatment flag per row.
struct TrainingSet {
  FeatureMatrix features;
  std::vector<double> outcomes;
  std::vector<std::uint8_t> treated;

  std::size_t size() const { return outcomes.size(); }
  std::size_t dimension() const { return features.cols(); }
  std::size_t count_treated() const;
  std::size_t count_control() const { return size() - count_treated(); }

  // Throws ValidationError on shape mismatch, non-finite values, or flags outside {0, 1}.
  void validate() const;
};

// Reach records plus their featurized rows (row i == featurize(records[i])).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<ReachRecord> records);

  const std::vector<ReachRecord>& records() const { return records_; }
  const FeatureMatrix& features() const { return features_; }
  const ReachRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  // Rows in dataset order, selected by index.
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset filter_condition(Condition condition) const;
  Dataset filter_participant(std::string_view participant_id) const;

  // Treated participant ids in order of first appearance.
  std::vector<std::string> treated_participants() const;

  TrainingSet training_set() const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.records_ == b.records_; }

 private:
  std::vector<ReachRecord> records_;
  FeatureMatrix features_;
};

Dataset concat(const Dataset& a, const Dataset& b);

// Reach-log CSV. Header `participant_id,session,trial,x,y,z,cue,time_s,condition`.
// Throws ParseError naming the offending data row.
Dataset parse_records(std::string_view text);
std::string write_records(const Dataset& dataset);

Dataset read_records_file(const std::string& path);
void write_records_file(const Dataset& dataset, const std::string& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace reachdiff
