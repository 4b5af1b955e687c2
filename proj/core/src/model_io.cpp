#include "bvvi/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bvvi {

using nlohmann::json;

namespace {

const json& field(const json& doc, const char* name) {
  if (!doc.is_object()) throw ParseError("model: top-level value is not an object");
  auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(std::string("model: missing field \"") + name + "\"");
  return *it;
}

int int_field(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_number_integer()) throw ParseError(std::string("model: field \"") + name + "\" must be an integer");
  return v.get<int>();
}

// Walks a nested array of the given shape, appending leaves in row-major order.
void flatten(const json& v, std::span<const std::size_t> shape, const std::string& where, Vec& out) {
  if (shape.empty()) {
    if (!v.is_number()) throw ParseError("model: " + where + " is not a number");
    out.push_back(v.get<double>());
    return;
  }
  if (!v.is_array() || v.size() != shape[0]) {
    throw ParseError("model: " + where + " must be an array of length " + std::to_string(shape[0]));
  }
  for (std::size_t i = 0; i < shape[0]; ++i) {
    flatten(v[i], shape.subspan(1), where + "[" + std::to_string(i) + "]", out);
  }
}

json nest(std::span<const double> flat, std::span<const std::size_t> shape) {
  if (shape.size() == 1) return json(std::vector<double>(flat.begin(), flat.end()));
  json arr = json::array();
  const std::size_t stride = flat.size() / shape[0];
  for (std::size_t i = 0; i < shape[0]; ++i) arr.push_back(nest(flat.subspan(i * stride, stride), shape.subspan(1)));
  return arr;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

TabularPomdp parse_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  TabularPomdp m;
  m.S = int_field(doc, "S");
  m.O = int_field(doc, "O");
  m.A = int_field(doc, "A");
  m.H = int_field(doc, "H");
  if (m.S < 1 || m.O < 1 || m.A < 1 || m.H < 1) {
    throw ValidationError("model: dimensions must be >= 1 (S=" + std::to_string(m.S) + ", O=" + std::to_string(m.O) +
                          ", A=" + std::to_string(m.A) + ", H=" + std::to_string(m.H) + ")");
  }
  const auto S = static_cast<std::size_t>(m.S), O = static_cast<std::size_t>(m.O);
  const auto A = static_cast<std::size_t>(m.A), H = static_cast<std::size_t>(m.H);
  const std::size_t mu_shape[] = {S};
  const std::size_t trans_shape[] = {H, A, S, S};
  const std::size_t emit_shape[] = {H, S, O};
  const std::size_t reward_shape[] = {H, S, A};
  flatten(field(doc, "mu1"), mu_shape, "mu1", m.mu1);
  flatten(field(doc, "trans"), trans_shape, "trans", m.trans_table);
  flatten(field(doc, "emit"), emit_shape, "emit", m.emit_table);
  flatten(field(doc, "reward"), reward_shape, "reward", m.reward_table);
  return m;
}

std::string dump_model(const TabularPomdp& m) {
  const auto S = static_cast<std::size_t>(m.S), O = static_cast<std::size_t>(m.O);
  const auto A = static_cast<std::size_t>(m.A), H = static_cast<std::size_t>(m.H);
  const std::size_t trans_shape[] = {H, A, S, S};
  const std::size_t emit_shape[] = {H, S, O};
  const std::size_t reward_shape[] = {H, S, A};
  json doc;
  doc["S"] = m.S;
  doc["O"] = m.O;
  doc["A"] = m.A;
  doc["H"] = m.H;
  doc["mu1"] = m.mu1;
  doc["trans"] = nest(m.trans_table, trans_shape);
  doc["emit"] = nest(m.emit_table, emit_shape);
  doc["reward"] = nest(m.reward_table, reward_shape);
  return doc.dump(2) + "\n";
}

TabularPomdp load_model(const std::filesystem::path& path) {
  TabularPomdp m = parse_model(read_file(path));
  const ValidationReport report = validate_model(m);
  if (!report.ok()) throw ValidationError(path.string() + ": " + report.to_string());
  return m;
}

void save_model(const TabularPomdp& model, const std::filesystem::path& path) { write_file(path, dump_model(model)); }

Policy parse_policy(const std::string& json_text, int A, int O, int H) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("policy: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("policy: top-level value is not an object");
  Policy policy(A, O, H);
  std::vector<bool> seen(policy.size(), false);
  std::vector<std::size_t> offsets(H + 1, 0);
  for (int h = 1; h <= H; ++h) offsets[h] = offsets[h - 1] + history_count(A, O, h);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const History f = History::from_key(it.key());
    if (f.step() > H) throw ParseError("policy: key '" + it.key() + "' is beyond the horizon");
    if (!it.value().is_number_integer()) throw ParseError("policy: value of '" + it.key() + "' is not an integer");
    const int a = it.value().get<int>();
    if (a < 0 || a >= A) throw ParseError("policy: action for '" + it.key() + "' is out of range");
    std::size_t index = 0;
    try {
      index = history_index(f, A, O);
    } catch (const std::out_of_range& e) {
      throw ParseError(std::string("policy: ") + e.what());
    }
    policy.set(f.step(), index, a);
    seen[offsets[f.step() - 1] + index] = true;
  }
  for (int h = 1; h <= H; ++h) {
    for (std::size_t i = 0; i < offsets[h] - offsets[h - 1]; ++i) {
      if (!seen[offsets[h - 1] + i]) {
        throw ParseError("policy: missing history '" + history_at(i, A, O, h).key() + "'");
      }
    }
  }
  return policy;
}

std::string dump_policy(const Policy& policy) {
  // Keys are emitted in tree order rather than nlohmann's sorted order so
  // that files read top-down by step.
  std::ostringstream os;
  os << "{\n";
  bool first = true;
  for (int h = 1; h <= policy.H(); ++h) {
    const std::uint64_t count = history_count(policy.A(), policy.O(), h);
    for (std::uint64_t i = 0; i < count; ++i) {
      if (!first) os << ",\n";
      first = false;
      os << "  \"" << history_at(i, policy.A(), policy.O(), h).key() << "\": " << policy.action(h, i);
    }
  }
  os << "\n}\n";
  return os.str();
}

Policy load_policy(const std::filesystem::path& path, int A, int O, int H) {
  return parse_policy(read_file(path), A, O, H);
}

void save_policy(const Policy& policy, const std::filesystem::path& path) { write_file(path, dump_policy(policy)); }

}  // namespace bvvi
