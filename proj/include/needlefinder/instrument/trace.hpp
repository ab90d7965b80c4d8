#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nf::instrument {

/// One trace line: `{"pp":"add:exit:0","vars":{"br0":1,"br1":0}}`.
struct TraceRecord
{
  std::string pp;
  std::vector<std::pair<std::string, std::int64_t>> vars; // in logged order
  bool operator==(const TraceRecord &) const = default;
};

std::string format_record(const TraceRecord &record);
/// nullopt for anything that is not a well-formed record.
std::optional<TraceRecord> parse_record(std::string_view line);
/// True for "<function>:<entry|exit|branch>:<ordinal>".
bool valid_point_id(std::string_view pp);

struct PointSamples
{
  std::vector<std::string> vars; // column order, fixed by the first record
  std::map<std::string, std::vector<std::int64_t>> columns;
  std::size_t record_count = 0;
  bool operator==(const PointSamples &) const = default;
};

class SampleStore
{
public:
  /// Appends a record. Returns false (and stores nothing) if its variable
  /// set differs from earlier records at the same point.
  bool add(const TraceRecord &record);
  void merge(const SampleStore &other);

  std::vector<std::string> points() const;
  std::size_t record_count(const std::string &pp) const;
  std::size_t total_records() const;
  const PointSamples *find(const std::string &pp) const;
  const std::map<std::string, PointSamples> &data() const { return points_; }
  bool empty() const { return points_.empty(); }

  bool operator==(const SampleStore &) const = default;

private:
  std::map<std::string, PointSamples> points_;
};

struct IngestOptions
{
  double max_malformed_fraction = 0.10;
};

struct IngestStats
{
  std::size_t lines = 0; // non-empty lines
  std::size_t records = 0;
  std::size_t malformed = 0;
};

/// Reads newline-delimited records. Malformed lines are skipped and
/// counted; FormatError if more than max_malformed_fraction of lines are.
SampleStore ingest(std::istream &in, const IngestOptions &options = {},
                   IngestStats *stats = nullptr);
/// As above; IoError if the file cannot be opened.
SampleStore ingest_file(const std::string &path, const IngestOptions &options = {},
                        IngestStats *stats = nullptr);

/// Writes the store back as records, point by point.
void serialize(const SampleStore &store, std::ostream &out);

/// Appends formatted records to a stream (the in-process trace sink).
class TraceWriter
{
public:
  explicit TraceWriter(std::ostream &out) : out_(&out) {}
  void write(const TraceRecord &record);
  std::size_t count() const { return count_; }

private:
  std::ostream *out_;
  std::size_t count_ = 0;
};

} // namespace nf::instrument
