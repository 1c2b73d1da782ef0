#include "cli_settings.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "gridsynth/errors.hpp"

namespace gridsynth::cli {

Rgb parse_color(const std::string& text) {
  int vals[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t comma = i < 2 ? text.find(',', pos) : text.size();
    if (comma == std::string::npos)
      throw InputError("color must be '<r>,<g>,<b>', got '" + text + "'");
    const char* first = text.data() + pos;
    const char* last = text.data() + comma;
    const auto [ptr, ec] = std::from_chars(first, last, vals[i]);
    if (ec != std::errc() || ptr != last || vals[i] < 0 || vals[i] > 255)
      throw InputError("color must be '<r>,<g>,<b>' with bytes, got '" + text + "'");
    pos = comma + 1;
  }
  return {static_cast<std::uint8_t>(vals[0]), static_cast<std::uint8_t>(vals[1]),
          static_cast<std::uint8_t>(vals[2])};
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grid-n",      "cell-m",    "k",           "eps",
      "lambda",      "min-cover", "early-stop",  "hist-bins",
      "w-emd",       "w-struct",  "seed",        "threads",
      "count",       "occlusion", "noise",       "tile-source",
      "background",  "tol",       "budget",      "variants-per-label",
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!known_keys().count(key))
      throw InputError("config line " + std::to_string(line_no) + ": unknown key '" +
                       key + "'");
    out[key] = value;
  }
  return out;
}

}  // namespace gridsynth::cli
