#include <needlefinder/errors.hpp>
#include <needlefinder/pipeline/manifest.hpp>

#include <filesystem>
#include <fstream>

namespace nf::pipeline {

namespace fs = std::filesystem;

namespace {

DriverKind kind_from(const std::string &s)
{
  if(s == "random_ops")
    return DriverKind::RandomOps;
  if(s == "cases")
    return DriverKind::Cases;
  if(s == "sweep")
    return DriverKind::Sweep;
  if(s == "command")
    return DriverKind::Command;
  throw FormatError("unknown driver kind '" + s + "'");
}

} // namespace

std::string_view driver_kind_name(DriverKind k)
{
  switch(k)
  {
  case DriverKind::RandomOps: return "random_ops";
  case DriverKind::Cases: return "cases";
  case DriverKind::Sweep: return "sweep";
  case DriverKind::Command: return "command";
  }
  return "?";
}

void from_json(const nlohmann::json &j, DriverSpec &d)
{
  d = {};
  d.kind = kind_from(j.at("kind").get<std::string>());
  d.check = j.value("check", "");
  switch(d.kind)
  {
  case DriverKind::RandomOps:
  {
    d.ops = j.at("ops").get<std::vector<std::string>>();
    auto r = j.value("value_range", std::vector<std::int64_t>{0, 20});
    if(r.size() != 2 || r[0] >= r[1])
      throw FormatError("value_range must be [lo, hi) with lo < hi");
    d.value_lo = r[0];
    d.value_hi = r[1];
    d.seed = j.value("seed", 0u);
    d.num_tests = j.at("num_tests").get<std::size_t>();
    d.max_len = j.at("max_len").get<std::size_t>();
    if(d.ops.empty())
      throw FormatError("random_ops needs at least one op");
    break;
  }
  case DriverKind::Cases:
    d.function = j.at("function").get<std::string>();
    d.cases = j.at("cases").get<std::vector<nlohmann::json>>();
    break;
  case DriverKind::Sweep:
    d.function = j.at("function").get<std::string>();
    d.param = j.value("param", "");
    d.from = j.at("from").get<std::int64_t>();
    d.to = j.at("to").get<std::int64_t>();
    d.step = j.value("step", std::int64_t{1});
    d.extra = j.value("extra", std::vector<std::int64_t>{});
    if(d.step <= 0)
      throw FormatError("sweep step must be positive");
    break;
  case DriverKind::Command:
    d.command = j.at("command").get<std::string>();
    if(d.command.empty())
      throw FormatError("test command is empty");
    break;
  }
}

void to_json(nlohmann::json &j, const DriverSpec &d)
{
  j = {{"kind", driver_kind_name(d.kind)}};
  if(!d.check.empty())
    j["check"] = d.check;
  switch(d.kind)
  {
  case DriverKind::RandomOps:
    j["ops"] = d.ops;
    j["value_range"] = {d.value_lo, d.value_hi};
    j["seed"] = d.seed;
    j["num_tests"] = d.num_tests;
    j["max_len"] = d.max_len;
    break;
  case DriverKind::Cases:
    j["function"] = d.function;
    j["cases"] = d.cases;
    break;
  case DriverKind::Sweep:
    j["function"] = d.function;
    j["param"] = d.param;
    j["from"] = d.from;
    j["to"] = d.to;
    j["step"] = d.step;
    j["extra"] = d.extra;
    break;
  case DriverKind::Command: j["command"] = d.command; break;
  }
}

std::string Manifest::path_of(const std::string &relative) const
{
  return (fs::path(base_dir) / relative).lexically_normal().string();
}

const Fixture *Manifest::find(const std::string &name) const
{
  for(const auto &f : fixtures)
    if(f.name == name)
      return &f;
  return nullptr;
}

Manifest parse_manifest(const nlohmann::json &j, const std::string &base_dir)
{
  Manifest m;
  m.base_dir = base_dir;
  try
  {
    m.schema_version = j.value("schema_version", 1);
    if(m.schema_version != 1)
      throw FormatError("unsupported manifest schema_version " + std::to_string(m.schema_version));
    for(const auto &fj : j.value("fixtures", nlohmann::json::array()))
    {
      Fixture f;
      f.name = fj.at("name").get<std::string>();
      f.sources = fj.at("sources").get<std::vector<std::string>>();
      f.fixed_sources = fj.value("fixed_sources", std::vector<std::string>{});
      f.bug_sources = fj.value("bug_sources", std::vector<std::string>{});
      f.oracles = fj.value("oracles", std::vector<std::string>{});
      if(fj.contains("driver"))
        f.driver = fj.at("driver").get<DriverSpec>();
      f.trace = fj.value("trace", "");
      if(fj.contains("harness"))
        for(const auto &t : fj.at("harness").value("targets", nlohmann::json::array()))
        {
          auto cfg = t.get<check::HarnessConfig>();
          cfg.validate();
          f.targets.push_back(std::move(cfg));
        }
      if(fj.contains("bug"))
      {
        const auto &b = fj.at("bug");
        f.bug.location = b.value("location", "");
        f.bug.mutation = b.value("mutation", "");
        f.bug.property = b.value("property", "");
        f.bug.witness = b.value("witness", std::map<std::string, std::int64_t>{});
      }
      if(m.find(f.name))
        throw FormatError("duplicate fixture '" + f.name + "'");
      m.fixtures.push_back(std::move(f));
    }
    if(j.contains("triage_corpus"))
    {
      const auto &t = j.at("triage_corpus");
      m.triage_sources = t.value("sources", std::vector<std::string>{});
      for(const auto &l : t.value("labels", nlohmann::json::array()))
        m.labels.push_back({l.at("function").get<std::string>(), l.at("decision").get<std::string>(),
                            l.value("reasons", std::vector<std::string>{}), l.value("rationale", "")});
    }
  }
  catch(const nlohmann::json::exception &e)
  {
    throw FormatError(std::string("corpus manifest: ") + e.what());
  }
  return m;
}

Manifest load_manifest(const std::string &path)
{
  std::ifstream in(path);
  if(!in)
    throw IoError(path);
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch(const nlohmann::json::exception &e)
  {
    throw FormatError(path + ": " + e.what());
  }
  return parse_manifest(j, fs::path(path).parent_path().string());
}

} // namespace nf::pipeline
