#include "latentedit/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>
#include <utility>

#include "latentedit/io.hpp"

namespace latentedit {

namespace {

struct TomlValue {
  enum class Type { string, integer, floating, boolean, array };

  Type type = Type::string;
  std::string str;
  std::int64_t integer = 0;
  double floating = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;
  int line = 0;
};

using TomlTable = std::map<std::string, TomlValue>;
using TomlDoc = std::map<std::string, TomlTable>;

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& what) {
  fail(errc::config_parse, origin + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strips an unquoted trailing comment.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  return true;
}

TomlValue parse_scalar(std::string_view text, const std::string& origin, int line) {
  TomlValue value;
  value.line = line;
  if (text.empty()) parse_fail(origin, line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      parse_fail(origin, line, "unterminated string");
    value.type = TomlValue::Type::string;
    const std::string_view body = text.substr(1, text.size() - 2);
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '\\') {
        if (i + 1 >= body.size() || (body[i + 1] != '"' && body[i + 1] != '\\'))
          parse_fail(origin, line, "unsupported escape in string");
        value.str.push_back(body[++i]);
      } else if (body[i] == '"') {
        parse_fail(origin, line, "unescaped quote in string");
      } else {
        value.str.push_back(body[i]);
      }
    }
    return value;
  }
  if (text == "true" || text == "false") {
    value.type = TomlValue::Type::boolean;
    value.boolean = text == "true";
    return value;
  }
  const std::string token(text);
  const bool looks_float = token.find_first_of(".eE") != std::string::npos &&
                           token.find("0x") != 0 && token.find("-0x") != 0;
  if (!looks_float) {
    std::int64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), parsed);
    if (ec == std::errc() && ptr == token.data() + token.size()) {
      value.type = TomlValue::Type::integer;
      value.integer = parsed;
      return value;
    }
  }
  char* end = nullptr;
  const double parsed = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty())
    parse_fail(origin, line, "cannot parse value '" + token + "'");
  value.type = TomlValue::Type::floating;
  value.floating = parsed;
  return value;
}

TomlValue parse_value(std::string_view text, const std::string& origin, int line) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') parse_fail(origin, line, "unterminated array");
    TomlValue value;
    value.type = TomlValue::Type::array;
    value.line = line;
    std::string_view body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      bool in_string = false;
      std::size_t split = body.size();
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
        if (body[i] == ',' && !in_string) {
          split = i;
          break;
        }
      }
      value.array.push_back(parse_scalar(trim(body.substr(0, split)), origin, line));
      body = split == body.size() ? std::string_view{} : trim(body.substr(split + 1));
    }
    return value;
  }
  return parse_scalar(text, origin, line);
}

TomlDoc parse_toml(std::string_view text, const std::string& origin) {
  TomlDoc doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(origin, line_no, "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_bare_key(name)) parse_fail(origin, line_no, "invalid section name");
      section = std::string(name);
      doc[section];  // sections may be empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) parse_fail(origin, line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_bare_key(key) || key.find('.') != std::string::npos)
      parse_fail(origin, line_no, "invalid key '" + key + "'");
    TomlTable& table = doc[section];
    if (table.contains(key))
      parse_fail(origin, line_no, "duplicate key '" + key + "'");
    table[key] = parse_value(line.substr(eq + 1), origin, line_no);
  }
  return doc;
}

/// Typed view over one section that tracks consumed keys; leftovers are
/// rejected by name.
class SectionReader {
 public:
  SectionReader(const TomlDoc& doc, std::string section, const std::string& origin)
      : section_(std::move(section)), origin_(origin) {
    const auto it = doc.find(section_);
    table_ = it == doc.end() ? nullptr : &it->second;
  }

  bool has(const std::string& key) const { return table_ && table_->contains(key); }

  const TomlValue* take(const std::string& key) {
    if (!table_) return nullptr;
    const auto it = table_->find(key);
    if (it == table_->end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  double number(const std::string& key, double fallback) {
    const TomlValue* v = take(key);
    if (!v) return fallback;
    return to_number(*v, key);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const TomlValue* v = take(key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::integer) type_fail(key, "an integer", v->line);
    return v->integer;
  }

  bool boolean(const std::string& key, bool fallback) {
    const TomlValue* v = take(key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::boolean) type_fail(key, "a boolean", v->line);
    return v->boolean;
  }

  std::string string(const std::string& key, std::string fallback) {
    const TomlValue* v = take(key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::string) type_fail(key, "a string", v->line);
    return v->str;
  }

  std::vector<double> number_array(const std::string& key) {
    const TomlValue* v = take(key);
    if (!v) return {};
    if (v->type != TomlValue::Type::array) type_fail(key, "an array", v->line);
    std::vector<double> out;
    out.reserve(v->array.size());
    for (const TomlValue& item : v->array) out.push_back(to_number(item, key));
    return out;
  }

  std::vector<std::string> string_array(const std::string& key) {
    const TomlValue* v = take(key);
    if (!v) return {};
    if (v->type != TomlValue::Type::array) type_fail(key, "an array", v->line);
    std::vector<std::string> out;
    out.reserve(v->array.size());
    for (const TomlValue& item : v->array) {
      if (item.type != TomlValue::Type::string) type_fail(key, "an array of strings", item.line);
      out.push_back(item.str);
    }
    return out;
  }

  void finish() {
    if (!table_) return;
    for (const auto& [key, value] : *table_)
      if (!consumed_.contains(key))
        fail(errc::config_unknown_key, origin_ + ": unknown key '" +
                                           (section_.empty() ? key : section_ + "." + key) + "'");
  }

 private:
  double to_number(const TomlValue& v, const std::string& key) {
    if (v.type == TomlValue::Type::floating) return v.floating;
    if (v.type == TomlValue::Type::integer) return static_cast<double>(v.integer);
    type_fail(key, "a number", v.line);
  }

  [[noreturn]] void type_fail(const std::string& key, const char* expected, int line) {
    fail(errc::config_invalid_value,
         origin_ + ":" + std::to_string(line) + ": key '" +
             (section_.empty() ? key : section_ + "." + key) + "' must be " + expected);
  }

  std::string section_;
  const std::string& origin_;
  const TomlTable* table_ = nullptr;
  std::set<std::string> consumed_;
};

constexpr int kDefaultDdimSteps = 15;
constexpr int kDefaultRfSteps = 8;

int checked_int(std::int64_t value, const std::string& what, const std::string& origin) {
  if (value < 0 || value > 1 << 24)
    fail(errc::config_invalid_value, origin + ": " + what + " out of range");
  return static_cast<int>(value);
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::string& origin) {
  const TomlDoc doc = parse_toml(text, origin);

  std::set<std::string> known_sections{"", "sampler", "fusion", "scenario", "output"};
  for (const auto& [section, table] : doc) {
    if (known_sections.contains(section)) continue;
    if (section.starts_with("scenario.cond.") &&
        section.size() > std::string("scenario.cond.").size())
      continue;
    fail(errc::config_unknown_key, origin + ": unknown section '[" + section + "]'");
  }
  {
    SectionReader root(doc, "", origin);
    root.finish();  // no keys are allowed outside sections
  }

  RunConfig config;

  SectionReader sampler(doc, "sampler", origin);
  const std::string kind = sampler.string("kind", "ddim");
  if (kind == "ddim")
    config.fusion.sampler = SamplerKind::ddim;
  else if (kind == "rf")
    config.fusion.sampler = SamplerKind::rf;
  else
    fail(errc::config_invalid_value, origin + ": sampler.kind must be \"ddim\" or \"rf\"");
  const bool has_steps = sampler.has("steps");
  config.fusion.steps = checked_int(sampler.integer("steps", 0), "sampler.steps", origin);
  if (!has_steps)
    config.fusion.steps =
        config.fusion.sampler == SamplerKind::ddim ? kDefaultDdimSteps : kDefaultRfSteps;
  config.fusion.seed = Seed{static_cast<std::uint64_t>(sampler.integer("seed", 0))};
  config.beta_start = sampler.number("beta_start", config.beta_start);
  config.beta_end = sampler.number("beta_end", config.beta_end);
  config.num_train_steps =
      checked_int(sampler.integer("num_train_steps", config.num_train_steps),
                  "sampler.num_train_steps", origin);
  sampler.finish();

  SectionReader fusion(doc, "fusion", origin);
  config.fusion.alpha_mix = fusion.number("alpha_mix", config.fusion.alpha_mix);
  config.fusion.sharpen.gamma = fusion.number("gamma", config.fusion.sharpen.gamma);
  config.fusion.sharpen.lambda = fusion.number("lambda", config.fusion.sharpen.lambda);
  config.fusion.block_size =
      checked_int(fusion.integer("block_size", config.fusion.block_size), "fusion.block_size",
                  origin);
  config.fusion.alpha_init = fusion.number("alpha_init", config.fusion.alpha_init);
  const std::string mode = fusion.string("mode", "inversion");
  if (mode == "inversion")
    config.fusion.mode = EditMode::inversion;
  else if (mode == "inversion_free")
    config.fusion.mode = EditMode::inversion_free;
  else
    fail(errc::config_invalid_value,
         origin + ": fusion.mode must be \"inversion\" or \"inversion_free\"");
  fusion.finish();

  SectionReader scenario(doc, "scenario", origin);
  const std::string scenario_kind = scenario.string("kind", "localized_edit");
  ScenarioSpec& spec = config.scenario.spec;
  spec.shape.channels = checked_int(scenario.integer("channels", spec.shape.channels),
                                    "scenario.channels", origin);
  spec.shape.height =
      checked_int(scenario.integer("height", spec.shape.height), "scenario.height", origin);
  spec.shape.width =
      checked_int(scenario.integer("width", spec.shape.width), "scenario.width", origin);
  const bool has_scenario_seed = scenario.has("seed");
  spec.seed = Seed{static_cast<std::uint64_t>(scenario.integer("seed", 0))};
  if (!has_scenario_seed) spec.seed = Seed{config.fusion.seed.value + 1};

  if (scenario_kind == "localized_edit") {
    config.scenario.kind = ScenarioConfig::Kind::localized_edit;
    spec.edit_region.x0 =
        checked_int(scenario.integer("mask_x", spec.edit_region.x0), "scenario.mask_x", origin);
    spec.edit_region.y0 =
        checked_int(scenario.integer("mask_y", spec.edit_region.y0), "scenario.mask_y", origin);
    spec.edit_region.width =
        checked_int(scenario.integer("mask_w", spec.edit_region.width), "scenario.mask_w", origin);
    spec.edit_region.height = checked_int(scenario.integer("mask_h", spec.edit_region.height),
                                          "scenario.mask_h", origin);
    spec.background_level = scenario.number("background_level", spec.background_level);
    spec.source_edit_level = scenario.number("source_edit_level", spec.source_edit_level);
    spec.target_edit_level = scenario.number("target_edit_level", spec.target_edit_level);
    spec.component_sigma = scenario.number("component_sigma", spec.component_sigma);
    spec.sample_sigma = scenario.number("sample_sigma", spec.sample_sigma);
  } else if (scenario_kind == "mixture_files") {
    config.scenario.kind = ScenarioConfig::Kind::mixture_files;
    config.scenario.z0_file = scenario.string("z0_file", "");
    if (config.scenario.z0_file.empty())
      fail(errc::config_invalid_value, origin + ": scenario.z0_file is required");
  } else {
    fail(errc::config_invalid_value,
         origin + ": scenario.kind must be \"localized_edit\" or \"mixture_files\"");
  }
  scenario.finish();

  for (const auto& [section, table] : doc) {
    if (!section.starts_with("scenario.cond.")) continue;
    if (config.scenario.kind != ScenarioConfig::Kind::mixture_files)
      fail(errc::config_invalid_value,
           origin + ": [" + section + "] requires scenario.kind = \"mixture_files\"");
    const std::string label = section.substr(std::string("scenario.cond.").size());
    SectionReader cond(doc, section, origin);
    const std::vector<double> weights = cond.number_array("weights");
    const std::vector<double> variances = cond.number_array("variances");
    const std::vector<std::string> mean_files = cond.string_array("mean_files");
    cond.finish();
    if (weights.empty() || weights.size() != variances.size() ||
        weights.size() != mean_files.size())
      fail(errc::config_invalid_value,
           origin + ": [" + section + "] weights/variances/mean_files must have equal length");
    std::vector<MixtureFileComponent> components;
    for (std::size_t i = 0; i < weights.size(); ++i)
      components.push_back({weights[i], variances[i], mean_files[i]});
    config.scenario.conditions[label] = std::move(components);
  }
  if (config.scenario.kind == ScenarioConfig::Kind::mixture_files &&
      (!config.scenario.conditions.contains("source") ||
       !config.scenario.conditions.contains("target")))
    fail(errc::config_invalid_value,
         origin + ": mixture_files needs [scenario.cond.source] and [scenario.cond.target]");

  SectionReader output(doc, "output", origin);
  config.output.directory = output.string("directory", config.output.directory);
  config.output.export_latents = output.boolean("export_latents", config.output.export_latents);
  config.output.export_maps = output.boolean("export_maps", config.output.export_maps);
  output.finish();

  validate(config.fusion);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_bytes(path), path.string());
}

Schedule build_schedule(const RunConfig& config) {
  if (config.fusion.sampler == SamplerKind::ddim)
    return build_ddim_schedule(config.fusion.steps, config.beta_start, config.beta_end,
                               config.num_train_steps);
  return RfSchedule::uniform(config.fusion.steps);
}

RunInputs build_inputs(const ScenarioConfig& scenario, const std::filesystem::path& base_dir) {
  if (scenario.kind == ScenarioConfig::Kind::localized_edit) {
    Scenario s = generate_scenario(scenario.spec);
    return RunInputs{std::move(s.z0_source), std::move(s.denoiser), s.edit_region,
                     std::move(s.target_mean), s.shape};
  }

  MixtureDenoiser denoiser;
  for (const auto& [label, components] : scenario.conditions) {
    std::vector<GaussianComponent> built;
    built.reserve(components.size());
    for (const MixtureFileComponent& comp : components)
      built.push_back({comp.weight, read_latent(base_dir / comp.mean_file), comp.variance});
    denoiser.set_condition(ConditionId{label}, std::move(built));
  }
  Grid z0 = read_latent(base_dir / scenario.z0_file);
  if (!(z0.shape() == denoiser.shape()))
    fail(errc::shape_mismatch, "z0 shape " + z0.shape().str() +
                                   " does not match the mixture shape " +
                                   denoiser.shape().str());
  const Shape shape = z0.shape();
  return RunInputs{std::move(z0), std::move(denoiser), std::nullopt, std::nullopt, shape};
}

}  // namespace latentedit
