#include "reachdiff/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "reachdiff/errors.hpp"

namespace reachdiff {

namespace {

constexpr std::array<std::string_view, kNumCues> kCueNames = {"move", "ok", "reach", "now"};

constexpr std::array<std::string_view, feature::kCount> kFeatureNames = {
    "x", "y", "z", "x²", "dist_home", "cue=move", "cue=ok", "cue=reach", "cue=now"};

constexpr std::string_view kHeader = "participant_id,session,trial,x,y,z,cue,time_s,condition";

bool finite(const ReachTarget& t) {
  return std::isfinite(t.x) && std::isfinite(t.y) && std::isfinite(t.z);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view text, std::size_t row, std::string_view column) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(row, "malformed number '" + std::string(text) + "' in column " +
                              std::string(column));
  }
  return value;
}

int parse_int(std::string_view text, std::size_t row, std::string_view column) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(row, "malformed integer '" + std::string(text) + "' in column " +
                              std::string(column));
  }
  return value;
}

}  // namespace

std::string_view cue_name(Cue cue) { return kCueNames.at(static_cast<std::size_t>(cue)); }

Cue parse_cue(std::string_view text) {
  for (std::size_t i = 0; i < kNumCues; ++i) {
    if (kCueNames[i] == text) return static_cast<Cue>(i);
  }
  throw ValidationError("unknown cue '" + std::string(text) + "' (expected move, ok, reach, now)");
}

void validate(const ReachRecord& record) {
  if (!finite(record.target)) throw ValidationError("reach target must be finite");
  if (!(record.time_s > 0.0) || !std::isfinite(record.time_s)) {
    throw ValidationError("time_s must be finite and > 0");
  }
  if (record.condition != Condition::kControl && record.condition != Condition::kTreated) {
    throw ValidationError("condition must be 0 or 1");
  }
  if (static_cast<std::size_t>(record.cue) >= kNumCues) throw ValidationError("invalid cue");
  if (record.session < 1) throw ValidationError("session must be >= 1");
}

std::string_view feature_name(std::size_t index) { return kFeatureNames.at(index); }

FeatureVector featurize(const ReachTarget& target, Cue cue) {
  if (!finite(target)) throw ValidationError("featurize: non-finite target coordinate");
  FeatureVector f{};
  f[feature::kX] = target.x;
  f[feature::kY] = target.y;
  f[feature::kZ] = target.z;
  f[feature::kXSquared] = target.x * target.x;
  f[feature::kDistHome] = std::sqrt(target.x * target.x + target.y * target.y + target.z * target.z);
  f[feature::kCueFirst + static_cast<std::size_t>(cue)] = 1.0;
  return f;
}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ValidationError("append_row: width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::size_t TrainingSet::count_treated() const {
  return static_cast<std::size_t>(std::count(treated.begin(), treated.end(), std::uint8_t{1}));
}

void TrainingSet::validate() const {
  if (features.rows() != outcomes.size() || treated.size() != outcomes.size()) {
    throw ValidationError("training set: features, outcomes and treatment differ in length");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(outcomes[i])) throw ValidationError("training set: non-finite outcome");
    if (treated[i] > 1) throw ValidationError("training set: treatment flag must be 0 or 1");
    for (double v : features.row(i)) {
      if (!std::isfinite(v)) throw ValidationError("training set: non-finite feature");
    }
  }
}

Dataset::Dataset(std::vector<ReachRecord> records)
    : records_(std::move(records)), features_(0, feature::kCount) {
  for (const auto& r : records_) {
    validate(r);
    features_.append_row(featurize(r));
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<ReachRecord> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(records_.at(i));
  return Dataset(std::move(out));
}

Dataset Dataset::filter_condition(Condition condition) const {
  std::vector<ReachRecord> out;
  for (const auto& r : records_) {
    if (r.condition == condition) out.push_back(r);
  }
  return Dataset(std::move(out));
}

Dataset Dataset::filter_participant(std::string_view participant_id) const {
  std::vector<ReachRecord> out;
  for (const auto& r : records_) {
    if (r.participant_id == participant_id) out.push_back(r);
  }
  return Dataset(std::move(out));
}

std::vector<std::string> Dataset::treated_participants() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& r : records_) {
    if (r.treated() && seen.insert(r.participant_id).second) ids.push_back(r.participant_id);
  }
  return ids;
}

TrainingSet Dataset::training_set() const {
  TrainingSet out;
  out.features = features_;
  out.outcomes.reserve(size());
  out.treated.reserve(size());
  for (const auto& r : records_) {
    out.outcomes.push_back(r.time_s);
    out.treated.push_back(r.treated() ? 1 : 0);
  }
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  std::vector<ReachRecord> out(a.records());
  out.insert(out.end(), b.records().begin(), b.records().end());
  return Dataset(std::move(out));
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Dataset parse_records(std::string_view text) {
  std::vector<ReachRecord> records;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!saw_header) {
      if (line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != kHeader) {
        throw ParseError(0, "expected header '" + std::string(kHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.size() != 9) {
      throw ParseError(line_no, "expected 9 fields, got " + std::to_string(fields.size()));
    }
    ReachRecord r;
    r.participant_id = std::string(fields[0]);
    if (r.participant_id.empty()) throw ParseError(line_no, "empty participant_id");
    r.session = parse_int(fields[1], line_no, "session");
    r.trial = parse_int(fields[2], line_no, "trial");
    r.target.x = parse_double(fields[3], line_no, "x");
    r.target.y = parse_double(fields[4], line_no, "y");
    r.target.z = parse_double(fields[5], line_no, "z");
    try {
      r.cue = parse_cue(fields[6]);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    r.time_s = parse_double(fields[7], line_no, "time_s");
    const int condition = parse_int(fields[8], line_no, "condition");
    if (condition != 0 && condition != 1) {
      throw ParseError(line_no, "condition must be 0 or 1, got " + std::string(fields[8]));
    }
    r.condition = static_cast<Condition>(condition);
    try {
      validate(r);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    records.push_back(std::move(r));
  }
  if (!saw_header) throw ParseError(0, "missing header");
  return Dataset(std::move(records));
}

std::string write_records(const Dataset& dataset) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& r : dataset) {
    out += r.participant_id;
    out += ',';
    out += std::to_string(r.session);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += format_double(r.target.x);
    out += ',';
    out += format_double(r.target.y);
    out += ',';
    out += format_double(r.target.z);
    out += ',';
    out += cue_name(r.cue);
    out += ',';
    out += format_double(r.time_s);
    out += ',';
    out += r.treated() ? '1' : '0';
    out += '\n';
  }
  return out;
}

Dataset read_records_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_records(ss.str());
}

void write_records_file(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_records(dataset);
}

}  // namespace reachdiff
