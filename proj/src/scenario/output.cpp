#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "unisynth/error.hpp"
#include "unisynth/scenario.hpp"

namespace unisynth {

namespace {

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void dump_value(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::null: out += "null"; return;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case Json::value_t::number_integer: out += std::to_string(j.get<long long>()); return;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<unsigned long long>()); return;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    case Json::value_t::string: out += j.dump(); return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && is_scalar(e);
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_value(j[i], indent, out);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        dump_value(j[i], indent + 2, out);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& item : j.items()) {  // std::map order: sorted keys
        out += pad + Json(item.key()).dump() + ": ";
        dump_value(item.value(), indent + 2, out);
        out += ++i < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "}";
      return;
    }
    default: out += "null"; return;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_json(const Json& j) {
  std::string out;
  dump_value(j, 0, out);
  out += '\n';
  return out;
}

void write_outputs(const std::string& dir, const FileSet& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& [name, content] : files) {
    const fs::path target = fs::path(dir) / name;
    const fs::path temp = fs::path(dir) / ("." + name + ".tmp");
    {
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write '" + temp.string() + "'");
      out << content;
      if (!out.flush()) throw Error("write failed for '" + temp.string() + "'");
    }
    fs::rename(temp, target, ec);
    if (ec) throw Error("cannot move output into place '" + target.string() + "': " + ec.message());
  }
}

}  // namespace unisynth
