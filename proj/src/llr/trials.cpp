#include <sstream>

#include "../csv.hpp"
#include "genet/error.hpp"
#include "genet/io.hpp"
#include "genet/llr_nas.hpp"

namespace genet {

std::string write_trials(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << kTrialHeader << '\n';
  for (const auto& t : trials) {
    out << t.superblock_index << ',' << to_string(t.block_type) << ',' << t.depth << ',' << t.width << ','
        << t.kernel << ',' << format_number(t.ratio) << ',';
    if (t.accuracy) out << format_number(*t.accuracy);
    out << '\n';
  }
  return out.str();
}

std::vector<TrialRecord> read_trials(std::string_view text) {
  std::vector<TrialRecord> out;
  bool header_seen = false;
  for (const auto& line : csv::lines(text)) {
    const auto content = csv::trim(line.text);
    if (content.front() == '#') continue;
    auto bad = [&](const std::string& why) { return Error(ErrorCode::kMalformedRow, why, line.number); };
    if (!header_seen) {
      if (content != kTrialHeader) throw bad("expected header '" + std::string(kTrialHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto f = csv::fields(content);
    if (f.size() != 7) throw bad("expected 7 fields, got " + std::to_string(f.size()));
    const auto index = csv::to_int(f[0]);
    const auto type = parse_block_type(f[1]);
    const auto depth = csv::to_int(f[2]);
    const auto width = csv::to_int(f[3]);
    const auto kernel = csv::to_int(f[4]);
    const auto ratio = csv::to_double(f[5]);
    if (!index || *index < 0 || !type || !depth || *depth < 1 || !width || *width < 1 || !kernel || *kernel < 1 ||
        !ratio || *ratio <= 0.0) {
      throw bad("bad structural field");
    }
    TrialRecord record{static_cast<int>(*index), *type,  static_cast<int>(*depth), static_cast<int>(*width),
                       static_cast<int>(*kernel), *ratio, std::nullopt};
    if (!f[6].empty()) {
      const auto accuracy = csv::to_double(f[6]);
      if (!accuracy) throw bad("accuracy is not a number");
      if (*accuracy < 0.0 || *accuracy > 1.0) {
        throw Error(ErrorCode::kOutOfRangeAccuracy, "accuracy " + std::string(f[6]) + " outside [0, 1]",
                    line.number);
      }
      record.accuracy = *accuracy;
    }
    out.push_back(record);
  }
  if (!header_seen) throw Error(ErrorCode::kMalformedRow, "missing header");
  return out;
}

std::vector<TrialRecord> ingest_trials(std::string_view text) {
  auto trials = read_trials(text);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!trials[i].accuracy) {
      throw Error(ErrorCode::kMalformedRow, "trial has no accuracy", static_cast<int>(i));
    }
  }
  return trials;
}

}  // namespace genet
