#include "edgesr/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace edgesr {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Shortest representation that parses back to the same double.
std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("TrainConfig: failed to format value");
  return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("TrainConfig: bad number for '" + key + "': " + value);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    long long x = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("TrainConfig: bad integer for '" + key + "': " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("TrainConfig: bad flag for '" + key + "': " + value);
}

}  // namespace

void TrainConfig::validate() const {
  if (scale != 2 && scale != 4 && scale != 8)
    throw std::invalid_argument("TrainConfig: scale must be 2, 4, or 8");
  if (hr_size < 16 || hr_size % 4 != 0 || hr_size % scale != 0)
    throw std::invalid_argument(
        "TrainConfig: hr_size must be >= 16 and divisible by 4 and by scale");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (lr_initial <= 0.0 || lr_fine <= 0.0)
    throw std::invalid_argument("TrainConfig: learning rates must be positive");
  if (lr_fine >= lr_initial)
    throw std::invalid_argument("TrainConfig: lr_fine must be below lr_initial");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
    throw std::invalid_argument("TrainConfig: Adam betas must lie in [0, 1)");
  if (canny_sigma <= 0.0) throw std::invalid_argument("TrainConfig: canny_sigma must be positive");
  if (degrade_sigma < 0.0)
    throw std::invalid_argument("TrainConfig: degrade_sigma must be nonnegative");
  if (d_to_g_lr_ratio <= 0.0)
    throw std::invalid_argument("TrainConfig: d_to_g_lr_ratio must be positive");
  if (plateau_window < 1) throw std::invalid_argument("TrainConfig: plateau_window must be >= 1");
  if (plateau_min_improvement < 0.0)
    throw std::invalid_argument("TrainConfig: plateau_min_improvement must be nonnegative");
  if (plateau_patience < 1)
    throw std::invalid_argument("TrainConfig: plateau_patience must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("TrainConfig: max_steps must be >= 1");
  if (base_width < 1) throw std::invalid_argument("TrainConfig: base_width must be >= 1");
  if (checkpoint_interval < 1)
    throw std::invalid_argument("TrainConfig: checkpoint_interval must be >= 1");
  if (checkpoint_dir.empty())
    throw std::invalid_argument("TrainConfig: checkpoint_dir must not be empty");
  weights.validate();
}

std::string TrainConfig::to_key_values() const {
  std::ostringstream out;
  out << "scale = " << scale << "\n";
  out << "hr_size = " << hr_size << "\n";
  out << "batch_size = " << batch_size << "\n";
  out << "lr_initial = " << format_double(lr_initial) << "\n";
  out << "lr_fine = " << format_double(lr_fine) << "\n";
  out << "adam_beta1 = " << format_double(adam_beta1) << "\n";
  out << "adam_beta2 = " << format_double(adam_beta2) << "\n";
  out << "canny_sigma = " << format_double(canny_sigma) << "\n";
  out << "degrade_sigma = " << format_double(degrade_sigma) << "\n";
  out << "d_to_g_lr_ratio = " << format_double(d_to_g_lr_ratio) << "\n";
  out << "plateau_window = " << plateau_window << "\n";
  out << "plateau_min_improvement = " << format_double(plateau_min_improvement) << "\n";
  out << "plateau_patience = " << plateau_patience << "\n";
  out << "max_steps = " << max_steps << "\n";
  out << "seed = " << seed << "\n";
  out << "base_width = " << base_width << "\n";
  out << "checkpoint_interval = " << checkpoint_interval << "\n";
  out << "checkpoint_dir = " << checkpoint_dir << "\n";
  out << "random_crop = " << (random_crop ? "true" : "false") << "\n";
  out << "lambda_g1 = " << format_double(weights.lambda_g1) << "\n";
  out << "lambda_fm = " << format_double(weights.lambda_fm) << "\n";
  out << "lambda_l1 = " << format_double(weights.lambda_l1) << "\n";
  out << "lambda_g2 = " << format_double(weights.lambda_g2) << "\n";
  out << "lambda_p = " << format_double(weights.lambda_p) << "\n";
  out << "lambda_s = " << format_double(weights.lambda_s) << "\n";
  return out.str();
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("TrainConfig: line " + std::to_string(line_no) +
                                  " is not key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "scale") cfg.scale = static_cast<int>(parse_int(key, value));
    else if (key == "hr_size") cfg.hr_size = static_cast<int>(parse_int(key, value));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "lr_initial") cfg.lr_initial = parse_double(key, value);
    else if (key == "lr_fine") cfg.lr_fine = parse_double(key, value);
    else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(key, value);
    else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(key, value);
    else if (key == "canny_sigma") cfg.canny_sigma = parse_double(key, value);
    else if (key == "degrade_sigma") cfg.degrade_sigma = parse_double(key, value);
    else if (key == "d_to_g_lr_ratio") cfg.d_to_g_lr_ratio = parse_double(key, value);
    else if (key == "plateau_window") cfg.plateau_window = static_cast<int>(parse_int(key, value));
    else if (key == "plateau_min_improvement")
      cfg.plateau_min_improvement = parse_double(key, value);
    else if (key == "plateau_patience")
      cfg.plateau_patience = static_cast<int>(parse_int(key, value));
    else if (key == "max_steps") cfg.max_steps = parse_int(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "base_width") cfg.base_width = static_cast<int>(parse_int(key, value));
    else if (key == "checkpoint_interval") cfg.checkpoint_interval = parse_int(key, value);
    else if (key == "checkpoint_dir") cfg.checkpoint_dir = value;
    else if (key == "random_crop") cfg.random_crop = parse_bool(key, value);
    else if (key == "lambda_g1") cfg.weights.lambda_g1 = parse_double(key, value);
    else if (key == "lambda_fm") cfg.weights.lambda_fm = parse_double(key, value);
    else if (key == "lambda_l1") cfg.weights.lambda_l1 = parse_double(key, value);
    else if (key == "lambda_g2") cfg.weights.lambda_g2 = parse_double(key, value);
    else if (key == "lambda_p") cfg.weights.lambda_p = parse_double(key, value);
    else if (key == "lambda_s") cfg.weights.lambda_s = parse_double(key, value);
    else
      throw std::invalid_argument("TrainConfig: unknown key '" + key + "' on line " +
                                  std::to_string(line_no));
  }
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("TrainConfig: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str());
}

std::string resolved_checkpoint_dir(const TrainConfig& cfg) {
  if (const char* env = std::getenv("EDGESR_CHECKPOINT_DIR"); env != nullptr && *env != '\0')
    return env;
  return cfg.checkpoint_dir;
}

}  // namespace edgesr
