#include "dclm/artifacts.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace dclm {

namespace {

constexpr const char* kModelVersion = "dclm-model/1";
constexpr const char* kLogicVersion = "dclm-logic/1";
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

using nlohmann::json;

json load_document(const std::string& path, const char* expected_version) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open artifact: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed artifact " + path + ": " + e.what());
  }
  const std::string version = doc.value("format_version", "<missing>");
  if (version != expected_version) {
    throw std::runtime_error("artifact version mismatch in " + path + ": file has '" + version +
                             "', this build reads '" + expected_version + "'");
  }
  return doc;
}

json tensor_to_json(const Tensor& t) {
  json j;
  j["shape"] = t.shape;
  j["data"] = encode_doubles(t.data.data(), t.size());
  return j;
}

Tensor tensor_from_json(const json& j) {
  Tensor t(j.at("shape").get<std::vector<Eigen::Index>>());
  const std::vector<double> values = decode_doubles(j.at("data").get<std::string>());
  if (static_cast<Eigen::Index>(values.size()) != t.size()) {
    throw std::runtime_error("tensor payload has " + std::to_string(values.size()) +
                             " values for shape " + shape_to_string(t.shape));
  }
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = values[i];
  return t;
}

json map_to_json(const FeatureMap& m) {
  json j;
  j["rows"] = m.values.rows();
  j["cols"] = m.values.cols();
  j["channel"] = m.channel;
  std::vector<double> flat;
  flat.reserve(m.values.size());
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) flat.push_back(m.values(i, c));
  }
  j["data"] = encode_doubles(flat.data(), static_cast<Eigen::Index>(flat.size()));
  return j;
}

FeatureMap map_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const std::vector<double> flat = decode_doubles(j.at("data").get<std::string>());
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw std::runtime_error("feature map payload size mismatch");
  }
  Eigen::ArrayXXd values(rows, cols);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) values(i, c) = flat[pos++];
  }
  return FeatureMap(std::move(values), j.value("channel", -1));
}

}  // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    const unsigned b0 = data[i];
    const unsigned b1 = i + 1 < len ? data[i + 1] : 0;
    const unsigned b2 = i + 2 < len ? data[i + 2] : 0;
    out.push_back(kAlphabet[b0 >> 2]);
    out.push_back(kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)]);
    out.push_back(i + 1 < len ? kAlphabet[((b1 & 0xf) << 2) | (b2 >> 6)] : '=');
    out.push_back(i + 2 < len ? kAlphabet[b2 & 0x3f] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) {
    throw std::runtime_error("base64 decode error: length " + std::to_string(text.size()) +
                             " is not a multiple of 4");
  }
  int table[256];
  std::fill(std::begin(table), std::end(table), -1);
  for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = i;

  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) {
          throw std::runtime_error("base64 decode error: misplaced padding");
        }
        vals[k] = 0;
        ++pad;
      } else {
        vals[k] = table[static_cast<unsigned char>(c)];
        if (vals[k] < 0) {
          throw std::runtime_error(std::string("base64 decode error: invalid character '") + c +
                                   "'");
        }
        if (pad > 0) throw std::runtime_error("base64 decode error: data after padding");
      }
    }
    out.push_back(static_cast<unsigned char>((vals[0] << 2) | (vals[1] >> 4)));
    if (pad < 2) out.push_back(static_cast<unsigned char>(((vals[1] & 0xf) << 4) | (vals[2] >> 2)));
    if (pad < 1) out.push_back(static_cast<unsigned char>(((vals[2] & 0x3) << 6) | vals[3]));
  }
  return out;
}

std::string encode_doubles(const double* values, Eigen::Index count) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(count) * 8);
  for (Eigen::Index i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &values[i], 8);
    for (int b = 0; b < 8; ++b) {
      bytes[static_cast<std::size_t>(i) * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
  }
  return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles(const std::string& b64) {
  const std::vector<unsigned char> bytes = base64_decode(b64);
  if (bytes.size() % 8 != 0) {
    throw std::runtime_error("tensor payload is not a whole number of doubles");
  }
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    }
    std::memcpy(&out[i], &bits, 8);
  }
  return out;
}

void save_model(const PerceptionParams& params, const std::string& path) {
  json doc;
  doc["format_version"] = kModelVersion;
  doc["seed"] = params.init_seed;
  json arch;
  arch["id"] = params.arch.id;
  arch["in_channels"] = params.arch.in_channels;
  arch["input_h"] = params.arch.input_h;
  arch["input_w"] = params.arch.input_w;
  arch["num_classes"] = params.arch.num_classes;
  json blocks = json::array();
  for (const auto& b : params.arch.blocks) {
    blocks.push_back({{"out_channels", b.out_channels}, {"kernel", b.kernel}, {"pool", b.pool}});
  }
  arch["blocks"] = blocks;
  doc["architecture"] = arch;

  json tensors;
  const auto names = params.tensor_names();
  const auto ts = params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) tensors[names[i]] = tensor_to_json(*ts[i]);
  doc["tensors"] = tensors;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write artifact: " + path);
  out << doc.dump(1) << '\n';
}

PerceptionParams load_model(const std::string& path) {
  const json doc = load_document(path, kModelVersion);
  const json& arch_j = doc.at("architecture");
  Architecture arch;
  arch.id = arch_j.at("id").get<std::string>();
  arch.in_channels = arch_j.at("in_channels").get<Eigen::Index>();
  arch.input_h = arch_j.at("input_h").get<Eigen::Index>();
  arch.input_w = arch_j.at("input_w").get<Eigen::Index>();
  arch.num_classes = arch_j.at("num_classes").get<Eigen::Index>();
  for (const auto& b : arch_j.at("blocks")) {
    arch.blocks.push_back({b.at("out_channels").get<Eigen::Index>(),
                           b.at("kernel").get<Eigen::Index>(), b.at("pool").get<bool>()});
  }

  PerceptionParams params = init_params(arch, doc.value("seed", std::uint64_t{0}));
  const auto names = params.tensor_names();
  auto ts = params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Tensor loaded = tensor_from_json(doc.at("tensors").at(names[i]));
    if (loaded.shape != ts[i]->shape) {
      throw std::runtime_error("tensor '" + names[i] + "' has shape " +
                               shape_to_string(loaded.shape) + ", architecture expects " +
                               shape_to_string(ts[i]->shape));
    }
    *ts[i] = std::move(loaded);
  }
  return params;
}

void save_logic(const LogicNetwork& net, const std::string& path) {
  json doc;
  doc["format_version"] = kLogicVersion;
  doc["variant"] = to_string(net.variant);
  doc["thresholds"] = {{"eps_match", net.eps_match},
                       {"eps_pred", net.eps_pred},
                       {"eps_smooth", net.eps_smooth}};
  doc["num_classes"] = net.num_classes;

  json preds = json::array();
  for (const auto& p : net.predicates) {
    json pj;
    pj["id"] = p.id;
    pj["template"] = map_to_json(p.template_map);
    json gs = json::array();
    for (std::size_t g = 0; g < p.groundings.size(); ++g) {
      json gj = map_to_json(p.groundings[g]);
      gj["value"] = static_cast<int>(p.grounding_truth[g]);
      gs.push_back(std::move(gj));
    }
    pj["groundings"] = gs;
    preds.push_back(std::move(pj));
  }
  doc["predicates"] = preds;

  json clauses = json::array();
  for (const auto& c : net.clauses) {
    json cj;
    cj["id"] = c.id;
    json lits = json::array();
    for (std::size_t l = 0; l < c.feature_predicates.size(); ++l) {
      lits.push_back({c.feature_predicates[l],
                      net.gamma.feature[net.feature_edges_of(c.id) + static_cast<int>(l)]});
    }
    cj["literals"] = lits;
    cj["decision"] = {c.decision_class, net.gamma.decision[c.id]};
    cj["group"] = c.group;
    clauses.push_back(std::move(cj));
  }
  doc["clauses"] = clauses;

  std::vector<double> lambda(net.lambda.data(), net.lambda.data() + net.lambda.size());
  doc["lambda"] = lambda;
  doc["groups"] = net.groups;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write artifact: " + path);
  out << doc.dump(1) << '\n';
}

LogicNetwork load_logic(const std::string& path) {
  const json doc = load_document(path, kLogicVersion);
  LogicNetwork net;
  net.variant = tnorm_from_string(doc.at("variant").get<std::string>());
  net.eps_match = doc.at("thresholds").at("eps_match").get<double>();
  net.eps_pred = doc.at("thresholds").at("eps_pred").get<double>();
  net.eps_smooth = doc.at("thresholds").at("eps_smooth").get<double>();
  const auto num_classes = doc.at("num_classes").get<Eigen::Index>();
  if (num_classes > 0) net.ensure_classes(num_classes);

  for (const auto& pj : doc.at("predicates")) {
    FeaturePredicate p;
    p.id = pj.at("id").get<int>();
    p.template_map = map_from_json(pj.at("template"));
    p.template_dist = normalize_feature_map(p.template_map, net.eps_smooth);
    for (const auto& gj : pj.at("groundings")) {
      p.groundings.push_back(map_from_json(gj));
      const int value = gj.at("value").get<int>();
      p.grounding_truth.push_back(static_cast<std::uint8_t>(value));
      if (value) ++p.true_count;
    }
    net.predicates.push_back(std::move(p));
  }

  for (const auto& cj : doc.at("clauses")) {
    std::vector<int> preds;
    std::vector<double> gammas;
    for (const auto& lit : cj.at("literals")) {
      preds.push_back(lit.at(0).get<int>());
      gammas.push_back(lit.at(1).get<double>());
    }
    const int cls = cj.at("decision").at(0).get<int>();
    const double dec_gamma = cj.at("decision").at(1).get<double>();
    net.add_clause(std::move(preds), cls, gammas, dec_gamma);
  }
  // add_clause already rebuilt groups in clause order; trust but verify count.
  const auto groups = doc.at("groups").get<std::vector<std::vector<int>>>();
  if (groups != net.groups) {
    throw std::runtime_error("logic artifact group table does not match its clauses");
  }

  const auto lambda = doc.at("lambda").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(lambda.size()) != net.lambda.size()) {
    throw std::runtime_error("logic artifact lambda length mismatch");
  }
  for (std::size_t i = 0; i < lambda.size(); ++i) net.lambda[static_cast<Eigen::Index>(i)] = lambda[i];
  return net;
}

void save_trace_csv(const GameTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << "iteration,objective,phi_r,phi_d,lambda_phi_c_sum,n_predicates,n_groups,seconds\n";
  char line[256];
  for (const auto& r : trace.records) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%d,%d,%.3f\n", r.iteration,
                  r.objective, r.phi_r_mean, r.phi_d_mean, r.lambda_phi_mean, r.n_predicates,
                  r.n_groups, r.seconds);
    out << line;
  }
}

void save_membership_csv(const LogicNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write membership matrix: " + path);
  const Eigen::MatrixXd m = membership_matrix(net);
  out << "disjunction_node";
  for (int p = 0; p < net.predicate_count(); ++p) out << ",A" << (p + 1);
  out << '\n';
  char cell[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << 'Y' << (r + 1);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(cell, sizeof cell, ",%.17g", m(r, c));
      out << cell;
    }
    out << '\n';
  }
}

}  // namespace dclm
