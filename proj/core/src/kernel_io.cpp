#include "homsum/kernel_io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "homsum/error.hpp"

namespace homsum {

namespace {
constexpr std::string_view kKernelFormat = "homsum-kernel/1";
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string write_kernel_text(const SymmetricKernel& f) {
  std::string out;
  out += "{\n  \"format\": \"";
  out += kKernelFormat;
  out += "\",\n  \"d\": " + std::to_string(f.order());
  out += ",\n  \"N\": " + std::to_string(f.dimension());
  out += ",\n  \"entries\": [";
  for (std::size_t k = 0; k < f.entry_count(); ++k) {
    out += k ? ",\n    [" : "\n    [";
    for (Index i : f.tuple(k)) out += std::to_string(i) + ", ";
    out += format_double(f.value(k));
    out += "]";
  }
  out += f.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

SymmetricKernel read_kernel_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, std::string("kernel file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw Error(ErrorCode::MalformedInput, "kernel file must hold a JSON object");
    if (doc.value("format", std::string{}) != kKernelFormat) {
      throw Error(ErrorCode::MalformedInput, "unrecognized kernel format tag");
    }
    const auto d = doc.at("d").get<std::int64_t>();
    const auto n = doc.at("N").get<std::int64_t>();
    if (d < 1 || d > 64 || n < 1 || n > std::int64_t{1} << 31) {
      throw Error(ErrorCode::MalformedInput, "kernel d or N out of range");
    }
    std::vector<KernelEntry> entries;
    for (const auto& rec : doc.at("entries")) {
      if (!rec.is_array() || rec.size() != static_cast<std::size_t>(d) + 1) {
        throw Error(ErrorCode::MalformedInput, "each entry must list d indices and a value");
      }
      KernelEntry e;
      for (std::int64_t k = 0; k < d; ++k) {
        const auto i = rec[k].get<std::int64_t>();
        if (i < 1 || i > n) throw Error(ErrorCode::IndexOutOfRange, "entry index outside [1, N]");
        e.tuple.push_back(static_cast<Index>(i));
      }
      e.value = rec[d].get<double>();
      entries.push_back(std::move(e));
    }
    return make_kernel(static_cast<int>(d), static_cast<Index>(n), std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("malformed kernel file: ") + e.what());
  }
}

void save_kernel(const SymmetricKernel& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Usage, "cannot open " + path.string() + " for writing");
  out << write_kernel_text(f);
  if (!out) throw Error(ErrorCode::Usage, "failed writing " + path.string());
}

SymmetricKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Usage, "cannot open kernel file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_kernel_text(buf.str());
}

}  // namespace homsum
