#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>

#include "ceq/errors.hpp"
#include "ceq/numerics.hpp"

namespace ceqcli {

using ceq::ValidationError;

namespace {

double to_double(const std::string& s, const std::string& where) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(x))
    throw ValidationError(where + ": not a number: '" + s + "'");
  return x;
}

}  // namespace

double parse_frequency(const json& value, const std::string& where) {
  if (value.is_number()) {
    const double hz = value.get<double>();
    if (!std::isfinite(hz)) throw ValidationError(where + ": not finite");
    return ceq::kTwoPi * hz;
  }
  if (!value.is_string()) throw ValidationError(where + ": expected a frequency (Hz number or string)");
  static const std::regex re(R"(^\s*(2pi\s*\*)?\s*([-+0-9.eE]+)\s*(Hz|kHz|MHz|GHz|rad/s)?\s*$)");
  const std::string s = value.get<std::string>();
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ValidationError(where + ": cannot read frequency '" + s + "'");
  double x = to_double(m[2].str(), where);
  const std::string unit = m[3].str();
  if (unit == "kHz") x *= 1e3;
  if (unit == "MHz") x *= 1e6;
  if (unit == "GHz") x *= 1e9;
  // "rad/s" is already angular; any other number is cyclic unless 2pi* says so
  if (m[1].matched) return ceq::kTwoPi * x;
  return unit == "rad/s" ? x : ceq::kTwoPi * x;
}

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string format_frequency(double rad_s) { return format_number(rad_s) + " rad/s"; }

Section::Section(json source, std::string path) : source_(std::move(source)), path_(std::move(path)) {
  if (source_.is_null()) source_ = json::object();
  if (!source_.is_object()) throw ValidationError(path_ + ": expected an object");
}

std::string Section::where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool Section::has(const std::string& key) const { return source_.contains(key); }

const json* Section::lookup(const std::string& key) {
  used_.insert(key);
  const auto it = source_.find(key);
  return it == source_.end() ? nullptr : &*it;
}

double Section::number(const std::string& key, double fallback) {
  const json* v = lookup(key);
  double x = fallback;
  if (v) {
    if (!v->is_number()) throw ValidationError(where(key) + ": expected a number");
    x = v->get<double>();
  }
  resolved_[key] = x;
  return x;
}

double Section::positive(const std::string& key, double fallback) {
  const double x = number(key, fallback);
  if (!(x > 0.0)) throw ValidationError(where(key) + ": must be positive");
  return x;
}

int Section::integer(const std::string& key, int fallback) {
  const json* v = lookup(key);
  int x = fallback;
  if (v) {
    if (!v->is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
    x = v->get<int>();
  }
  resolved_[key] = x;
  return x;
}

bool Section::flag(const std::string& key, bool fallback) {
  const json* v = lookup(key);
  bool x = fallback;
  if (v) {
    if (!v->is_boolean()) throw ValidationError(where(key) + ": expected true or false");
    x = v->get<bool>();
  }
  resolved_[key] = x;
  return x;
}

std::string Section::text(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
  const json* v = lookup(key);
  std::string x = fallback;
  if (v) {
    if (!v->is_string()) throw ValidationError(where(key) + ": expected a string");
    x = v->get<std::string>();
  }
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ValidationError(where(key) + ": '" + x + "' is not one of " + list);
  }
  resolved_[key] = x;
  return x;
}

double Section::frequency(const std::string& key, double fallback_rad_s) {
  const json* v = lookup(key);
  const double x = v ? parse_frequency(*v, where(key)) : fallback_rad_s;
  resolved_[key] = format_frequency(x);
  return x;
}

std::vector<double> Section::list(const std::string& key, const std::vector<double>& fallback) {
  const json* v = lookup(key);
  std::vector<double> out = fallback;
  if (v) {
    if (!v->is_array()) throw ValidationError(where(key) + ": expected a list of numbers");
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_number()) throw ValidationError(where(key) + ": expected a list of numbers");
      out.push_back(e.get<double>());
    }
  }
  resolved_[key] = out;
  return out;
}

std::vector<double> Section::grid(const std::string& key, const std::vector<double>& fallback) {
  const json* v = lookup(key);
  std::vector<double> out = fallback;
  if (v && v->is_object()) {
    Section r(*v, where(key));
    const double a = r.number("start", 0.0);
    const double b = r.number("stop", 0.0);
    const int n = r.integer("count", 0);
    const bool log = r.flag("log", false);
    r.finish();
    if (n < 1) throw ValidationError(where(key) + ": empty sweep grid");
    if (log && !(a > 0.0 && b > 0.0)) throw ValidationError(where(key) + ": logarithmic range needs positive ends");
    out.clear();
    for (int i = 0; i < n; ++i) {
      const double u = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(log ? a * std::pow(b / a, u) : a + (b - a) * u);
    }
  } else if (v) {
    if (!v->is_array()) throw ValidationError(where(key) + ": expected a list or a range object");
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_number()) throw ValidationError(where(key) + ": expected numbers");
      out.push_back(e.get<double>());
    }
  }
  if (out.empty()) throw ValidationError(where(key) + ": empty sweep grid");
  resolved_[key] = out;
  return out;
}

std::vector<double> Section::frequency_grid(const std::string& key, const std::vector<double>& fallback_rad_s) {
  const json* v = lookup(key);
  std::vector<double> out = fallback_rad_s;
  if (v) {
    out.clear();
    if (v->is_array()) {
      for (const auto& e : *v) out.push_back(parse_frequency(e, where(key)));
    } else {
      out.push_back(parse_frequency(*v, where(key)));
    }
  }
  if (out.empty()) throw ValidationError(where(key) + ": empty sweep grid");
  json echo = json::array();
  for (double x : out) echo.push_back(format_frequency(x));
  resolved_[key] = echo;
  return out;
}

std::vector<int> Section::int_grid(const std::string& key, const std::vector<int>& fallback) {
  const json* v = lookup(key);
  std::vector<int> out = fallback;
  if (v) {
    out.clear();
    if (v->is_number_integer()) {
      out.push_back(v->get<int>());
    } else if (v->is_array()) {
      for (const auto& e : *v) {
        if (!e.is_number_integer()) throw ValidationError(where(key) + ": expected integers");
        out.push_back(e.get<int>());
      }
    } else {
      throw ValidationError(where(key) + ": expected an integer or a list of integers");
    }
  }
  if (out.empty()) throw ValidationError(where(key) + ": empty sweep grid");
  resolved_[key] = out;
  return out;
}

std::vector<bool> Section::flag_grid(const std::string& key, const std::vector<bool>& fallback) {
  const json* v = lookup(key);
  std::vector<bool> out = fallback;
  if (v) {
    out.clear();
    if (v->is_boolean()) {
      out.push_back(v->get<bool>());
    } else if (v->is_array()) {
      for (const auto& e : *v) {
        if (!e.is_boolean()) throw ValidationError(where(key) + ": expected true/false values");
        out.push_back(e.get<bool>());
      }
    } else {
      throw ValidationError(where(key) + ": expected a boolean or a list of booleans");
    }
  }
  if (out.empty()) throw ValidationError(where(key) + ": empty sweep grid");
  json echo = json::array();
  for (bool b : out) echo.push_back(b);
  resolved_[key] = echo;
  return out;
}

Section Section::child(const std::string& key) {
  const json* v = lookup(key);
  return Section(v ? *v : json::object(), where(key));
}

void Section::adopt(const std::string& key, Section& child) {
  child.finish();
  resolved_[key] = child.resolved();
}

void Section::finish() const {
  for (const auto& [key, _] : source_.items()) {
    if (!used_.count(key)) throw ValidationError(where(key) + ": unknown field");
  }
}

}  // namespace ceqcli
