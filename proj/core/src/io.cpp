#include "clipfl/io.hpp"

#include "clipfl/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace clipfl {

namespace {

std::string format_17g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep the token a JSON float so integer-valued doubles stay doubles on reparse.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void emit(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const auto newline = [&](int level) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * level), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(key).dump();
        out += indent < 0 ? ":" : ": ";
        emit(value, indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        emit(value, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_17g(v) : "null";
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string canonical_json(const nlohmann::json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string json_hash(const nlohmann::json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_json(j))));
  return buf;
}

std::string record_csv(const RunRecord& record) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : record.rows) {
    out += std::to_string(row.epoch);
    out += ',';
    out += format_shortest(row.f_residual);
    out += ',';
    out += format_shortest(row.grad_norm);
    out += ',';
    out += format_shortest(row.stepsize);
    out += ',';
    out += std::to_string(row.comm_rounds);
    out += ',';
    out += std::to_string(row.counters.component_grads);
    out += ',';
    out += std::to_string(row.counters.client_grads);
    out += ',';
    out += std::to_string(row.counters.full_grads);
    out += '\n';
  }
  return out;
}

nlohmann::json record_json(const RunRecord& record) {
  nlohmann::json x = nlohmann::json::array();
  for (Eigen::Index i = 0; i < record.final_x.size(); ++i) x.push_back(record.final_x[i]);
  nlohmann::json j{{"algorithm", record.algorithm},
                   {"config", record.config},
                   {"seed", record.seed},
                   {"status", to_string(record.status)},
                   {"f_star", record.f_star},
                   {"epochs_completed", record.epochs_completed()},
                   {"final_x", x},
                   {"wall_seconds", record.wall_seconds},
                   {"csv_schema_version", kCsvSchemaVersion}};
  if (!record.rows.empty()) {
    const auto& last = record.rows.back();
    j["final"] = {{"f_residual", last.f_residual},
                  {"grad_norm", last.grad_norm},
                  {"comm_rounds", last.comm_rounds},
                  {"component_grads", last.counters.component_grads},
                  {"client_grads", last.counters.client_grads},
                  {"full_grads", last.counters.full_grads}};
  }
  return j;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

}  // namespace clipfl
