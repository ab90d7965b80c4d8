#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/trace.hpp>

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace nf::instrument {

std::string format_record(const TraceRecord &record)
{
  std::string s = "{\"pp\":" + nlohmann::json(record.pp).dump() + ",\"vars\":{";
  for(std::size_t i = 0; i < record.vars.size(); ++i)
  {
    if(i)
      s += ",";
    s += nlohmann::json(record.vars[i].first).dump() + ":" + std::to_string(record.vars[i].second);
  }
  return s + "}}";
}

bool valid_point_id(std::string_view pp)
{
  auto last = pp.rfind(':');
  if(last == std::string_view::npos || last + 1 >= pp.size())
    return false;
  for(char c : pp.substr(last + 1))
    if(c < '0' || c > '9')
      return false;
  auto mid = pp.rfind(':', last - 1);
  if(mid == std::string_view::npos || mid == 0)
    return false;
  auto kind = pp.substr(mid + 1, last - mid - 1);
  return kind == "entry" || kind == "exit" || kind == "branch";
}

std::optional<TraceRecord> parse_record(std::string_view line)
{
  auto j = nlohmann::ordered_json::parse(line.begin(), line.end(), nullptr, false);
  if(j.is_discarded() || !j.is_object() || j.size() != 2)
    return std::nullopt;
  auto pp = j.find("pp");
  auto vars = j.find("vars");
  if(pp == j.end() || vars == j.end() || !pp->is_string() || !vars->is_object())
    return std::nullopt;
  TraceRecord r;
  r.pp = pp->get<std::string>();
  if(!valid_point_id(r.pp))
    return std::nullopt;
  for(auto it = vars->begin(); it != vars->end(); ++it)
  {
    if(!it->is_number_integer())
      return std::nullopt;
    if(it->is_number_unsigned() && it->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      return std::nullopt;
    r.vars.emplace_back(it.key(), it->get<std::int64_t>());
  }
  return r;
}

bool SampleStore::add(const TraceRecord &record)
{
  auto it = points_.find(record.pp);
  if(it == points_.end())
  {
    std::set<std::string> names;
    for(const auto &[n, _] : record.vars)
      if(!names.insert(n).second)
        return false;
    PointSamples p;
    for(const auto &[n, v] : record.vars)
    {
      p.vars.push_back(n);
      p.columns[n].push_back(v);
    }
    p.record_count = 1;
    points_.emplace(record.pp, std::move(p));
    return true;
  }
  PointSamples &p = it->second;
  if(record.vars.size() != p.vars.size())
    return false;
  for(const auto &[n, _] : record.vars)
    if(!p.columns.count(n))
      return false;
  std::set<std::string> names;
  for(const auto &[n, _] : record.vars)
    if(!names.insert(n).second)
      return false;
  for(const auto &[n, v] : record.vars)
    p.columns[n].push_back(v);
  ++p.record_count;
  return true;
}

void SampleStore::merge(const SampleStore &other)
{
  for(const auto &[pp, samples] : other.points_)
    for(std::size_t i = 0; i < samples.record_count; ++i)
    {
      TraceRecord r{pp, {}};
      for(const auto &v : samples.vars)
        r.vars.emplace_back(v, samples.columns.at(v)[i]);
      if(!add(r))
        throw FormatError("cannot merge samples at " + pp + ": variable sets differ");
    }
}

std::vector<std::string> SampleStore::points() const
{
  std::vector<std::string> out;
  for(const auto &[pp, _] : points_)
    out.push_back(pp);
  return out;
}

std::size_t SampleStore::record_count(const std::string &pp) const
{
  auto it = points_.find(pp);
  return it == points_.end() ? 0 : it->second.record_count;
}

std::size_t SampleStore::total_records() const
{
  std::size_t n = 0;
  for(const auto &[_, p] : points_)
    n += p.record_count;
  return n;
}

const PointSamples *SampleStore::find(const std::string &pp) const
{
  auto it = points_.find(pp);
  return it == points_.end() ? nullptr : &it->second;
}

SampleStore ingest(std::istream &in, const IngestOptions &options, IngestStats *stats)
{
  SampleStore store;
  IngestStats local;
  std::string line;
  while(std::getline(in, line))
  {
    if(!line.empty() && line.back() == '\r')
      line.pop_back();
    if(line.find_first_not_of(" \t") == std::string::npos)
      continue;
    ++local.lines;
    auto r = parse_record(line);
    if(r && store.add(*r))
      ++local.records;
    else
      ++local.malformed;
  }
  if(stats)
    *stats = local;
  if(local.lines > 0 &&
     static_cast<double>(local.malformed) > options.max_malformed_fraction * local.lines)
    throw FormatError(std::to_string(local.malformed) + " of " + std::to_string(local.lines) +
                      " trace lines are malformed");
  return store;
}

SampleStore ingest_file(const std::string &path, const IngestOptions &options, IngestStats *stats)
{
  std::ifstream in(path);
  if(!in)
    throw IoError(path);
  return ingest(in, options, stats);
}

void serialize(const SampleStore &store, std::ostream &out)
{
  for(const auto &[pp, samples] : store.data())
    for(std::size_t i = 0; i < samples.record_count; ++i)
    {
      TraceRecord r{pp, {}};
      for(const auto &v : samples.vars)
        r.vars.emplace_back(v, samples.columns.at(v)[i]);
      out << format_record(r) << '\n';
    }
}

void TraceWriter::write(const TraceRecord &record)
{
  *out_ << format_record(record) << '\n';
  ++count_;
}

} // namespace nf::instrument
