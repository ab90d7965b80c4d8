#include <needlefinder/errors.hpp>
#include <needlefinder/invariant/invariant.hpp>

#include <algorithm>
#include <optional>
#include <tuple>

namespace nf::invariant {

std::string_view form_name(Form form)
{
  switch(form)
  {
  case Form::Constant: return "constant";
  case Form::OneOf: return "one_of";
  case Form::Range: return "range";
  case Form::NonZero: return "nonzero";
  case Form::Linear: return "linear";
  }
  return "?";
}

Form form_from_name(std::string_view name)
{
  for(Form f : {Form::Constant, Form::OneOf, Form::Range, Form::NonZero, Form::Linear})
    if(form_name(f) == name)
      return f;
  throw FormatError("unknown invariant form '" + std::string(name) + "'");
}

std::string_view dialect_name(Dialect d)
{
  return d == Dialect::Cbmc ? "cbmc" : "svcomp";
}

Dialect dialect_from_name(std::string_view name)
{
  if(name == "cbmc")
    return Dialect::Cbmc;
  if(name == "svcomp")
    return Dialect::Svcomp;
  throw FormatError("unknown dialect '" + std::string(name) + "'");
}

std::string point_function(const std::string &pp)
{
  auto last = pp.rfind(':');
  auto mid = last == std::string::npos || last == 0 ? std::string::npos : pp.rfind(':', last - 1);
  return mid == std::string::npos ? pp : pp.substr(0, mid);
}

std::string point_kind(const std::string &pp)
{
  auto last = pp.rfind(':');
  auto mid = last == std::string::npos || last == 0 ? std::string::npos : pp.rfind(':', last - 1);
  return mid == std::string::npos ? "" : pp.substr(mid + 1, last - mid - 1);
}

std::vector<std::string> Invariant::variables() const
{
  if(form == Form::Linear)
    return {var, x};
  return {var};
}

namespace {

using i128 = __int128;

// y == a*x + b on every sample, with integer a != 0 and bounded |a|, |b|.
std::optional<std::pair<std::int64_t, std::int64_t>> fit_linear(const std::vector<std::int64_t> &ys,
                                                                 const std::vector<std::int64_t> &xs,
                                                                 const InferenceConfig &cfg)
{
  std::size_t first = 0, second = xs.size();
  for(std::size_t i = 1; i < xs.size(); ++i)
    if(xs[i] != xs[first])
    {
      second = i;
      break;
    }
  if(second == xs.size())
    return std::nullopt; // fewer than two distinct x
  i128 dy = i128(ys[second]) - ys[first];
  i128 dx = i128(xs[second]) - xs[first];
  if(dy % dx != 0)
    return std::nullopt;
  i128 a = dy / dx;
  if(a == 0 || a > cfg.linear_max_a || a < -cfg.linear_max_a)
    return std::nullopt;
  i128 b = i128(ys[first]) - a * xs[first];
  if(b > cfg.linear_max_b || b < -cfg.linear_max_b)
    return std::nullopt;
  for(std::size_t i = 0; i < xs.size(); ++i)
    if(i128(ys[i]) != a * xs[i] + b)
      return std::nullopt;
  return std::pair{static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)};
}

auto sort_key(const Invariant &i)
{
  return std::tie(i.pp, i.var, i.form, i.x);
}

std::string num(std::int64_t v)
{
  return std::to_string(v);
}

} // namespace

std::vector<Invariant> infer(const instrument::SampleStore &store, const std::string &pp,
                             const InferenceConfig &cfg)
{
  const instrument::PointSamples *p = store.find(pp);
  if(!p || p->record_count < cfg.min_support || p->record_count == 0)
    throw InsufficientSupport(pp);
  auto on = [&](Form f) { return cfg.enabled.count(f) > 0; };
  std::vector<Invariant> out;
  std::size_t n = p->record_count;

  for(const auto &v : p->vars)
  {
    const auto &col = p->columns.at(v);
    std::set<std::int64_t> distinct(col.begin(), col.end());
    Invariant base;
    base.pp = pp;
    base.var = v;
    base.support = n;
    bool zero_seen = distinct.count(0) > 0;
    std::int64_t lo = *distinct.begin(), hi = *distinct.rbegin();
    bool excludes_zero = false;
    if(distinct.size() == 1 && on(Form::Constant))
    {
      Invariant i = base;
      i.form = Form::Constant;
      i.value = lo;
      out.push_back(i);
      excludes_zero = true;
    }
    else if(distinct.size() >= 2 && distinct.size() <= cfg.one_of_cap && on(Form::OneOf))
    {
      Invariant i = base;
      i.form = Form::OneOf;
      i.values.assign(distinct.begin(), distinct.end());
      out.push_back(i);
      excludes_zero = true;
    }
    else if(on(Form::Range))
    {
      Invariant i = base;
      i.form = Form::Range;
      i.lo = lo;
      i.hi = hi;
      out.push_back(i);
      excludes_zero = lo > 0 || hi < 0;
    }
    if(!zero_seen && !excludes_zero && on(Form::NonZero))
    {
      Invariant i = base;
      i.form = Form::NonZero;
      out.push_back(i);
    }
  }

  if(on(Form::Linear))
    for(const auto &y : p->vars)
      for(const auto &x : p->vars)
      {
        if(x == y)
          continue;
        if(auto fit = fit_linear(p->columns.at(y), p->columns.at(x), cfg))
        {
          Invariant i;
          i.pp = pp;
          i.form = Form::Linear;
          i.var = y;
          i.x = x;
          i.a = fit->first;
          i.b = fit->second;
          i.support = n;
          out.push_back(i);
        }
      }

  std::sort(out.begin(), out.end(),
            [](const Invariant &a, const Invariant &b) { return sort_key(a) < sort_key(b); });
  return out;
}

std::vector<Invariant> infer_all(const instrument::SampleStore &store, const InferenceConfig &cfg,
                                 const std::set<std::string> &functions,
                                 std::vector<std::string> *skipped)
{
  std::vector<Invariant> out;
  for(const auto &pp : store.points())
  {
    if(!functions.empty() && !functions.count(point_function(pp)))
      continue;
    if(store.record_count(pp) < cfg.min_support)
    {
      if(skipped)
        skipped->push_back(pp);
      continue;
    }
    auto part = infer(store, pp, cfg);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::string render_condition(const Invariant &inv, Dialect,
                             const std::map<std::string, std::string> &rename)
{
  auto name = [&](const std::string &v) {
    auto it = rename.find(v);
    return it == rename.end() ? v : it->second;
  };
  std::string v = name(inv.var);
  switch(inv.form)
  {
  case Form::Constant: return "(" + v + "==" + num(inv.value) + ")";
  case Form::OneOf:
  {
    std::string s = "(";
    for(std::size_t i = 0; i < inv.values.size(); ++i)
      s += (i ? "||" : "") + v + "==" + num(inv.values[i]);
    return s + ")";
  }
  case Form::Range: return "(" + num(inv.lo) + "<=" + v + " && " + v + "<=" + num(inv.hi) + ")";
  case Form::NonZero: return "(" + v + "!=0)";
  case Form::Linear:
  {
    std::string b = inv.b < 0 ? num(inv.b) : "+" + num(inv.b);
    return "(" + v + "==" + num(inv.a) + "*" + name(inv.x) + b + ")";
  }
  }
  return "(1)";
}

Invariant widen_to_range(const Invariant &inv)
{
  if(inv.form != Form::OneOf || inv.values.empty())
    return inv;
  Invariant r = inv;
  r.form = Form::Range;
  r.lo = *std::min_element(inv.values.begin(), inv.values.end());
  r.hi = *std::max_element(inv.values.begin(), inv.values.end());
  r.values.clear();
  return r;
}

bool holds(const Invariant &inv, const std::map<std::string, std::int64_t> &sample)
{
  auto it = sample.find(inv.var);
  if(it == sample.end())
    return false;
  std::int64_t v = it->second;
  switch(inv.form)
  {
  case Form::Constant: return v == inv.value;
  case Form::OneOf: return std::find(inv.values.begin(), inv.values.end(), v) != inv.values.end();
  case Form::Range: return inv.lo <= v && v <= inv.hi;
  case Form::NonZero: return v != 0;
  case Form::Linear:
  {
    auto x = sample.find(inv.x);
    if(x == sample.end())
      return false;
    return i128(v) == i128(inv.a) * x->second + inv.b;
  }
  }
  return false;
}

void to_json(nlohmann::json &j, const Invariant &inv)
{
  j = nlohmann::json::object();
  j["pp"] = inv.pp;
  j["form"] = form_name(inv.form);
  j["var"] = inv.var;
  switch(inv.form)
  {
  case Form::Constant: j["value"] = inv.value; break;
  case Form::OneOf: j["values"] = inv.values; break;
  case Form::Range:
    j["lo"] = inv.lo;
    j["hi"] = inv.hi;
    break;
  case Form::NonZero: break;
  case Form::Linear:
    j["a"] = inv.a;
    j["x"] = inv.x;
    j["b"] = inv.b;
    break;
  }
  j["support"] = inv.support;
}

void from_json(const nlohmann::json &j, Invariant &inv)
{
  inv = Invariant{};
  inv.pp = j.at("pp").get<std::string>();
  inv.form = form_from_name(j.at("form").get<std::string>());
  inv.var = j.at("var").get<std::string>();
  inv.support = j.value("support", std::size_t{0});
  switch(inv.form)
  {
  case Form::Constant: inv.value = j.at("value").get<std::int64_t>(); break;
  case Form::OneOf: inv.values = j.at("values").get<std::vector<std::int64_t>>(); break;
  case Form::Range:
    inv.lo = j.at("lo").get<std::int64_t>();
    inv.hi = j.at("hi").get<std::int64_t>();
    if(inv.lo > inv.hi)
      throw FormatError("range with lo > hi at " + inv.pp);
    break;
  case Form::NonZero: break;
  case Form::Linear:
    inv.a = j.at("a").get<std::int64_t>();
    inv.x = j.at("x").get<std::string>();
    inv.b = j.at("b").get<std::int64_t>();
    if(inv.a == 0)
      throw FormatError("linear invariant with a == 0 at " + inv.pp);
    break;
  }
}

} // namespace nf::invariant
