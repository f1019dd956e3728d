// JSON state files.
//
//   { "dims": [2, 2], "kind": "density" | "pure",
//     "entries": [[re, im], ...]            (row-major; a flat [re, im, re, im, ...] list is also accepted)
//     "decomposition": { "weights": [...], "a_states": [[[re, im], ...], ...], "b_states": [...] } }

#pragma once

#include "qshare/extension.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace qshare::io {

using json = nlohmann::json;

/// Malformed input (exit code 2); `what()` names the offending location.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StateKind { density, pure };

struct StateFile {
  Dims dims;
  StateKind kind = StateKind::density;
  std::optional<DensityMatrix> density;  // always set after loading (pure states are converted)
  std::optional<PureState> pure;          // set for kind = pure
  std::optional<SeparableDecomposition> decomposition;

  const DensityMatrix& state() const { return *density; }
};

namespace detail {

inline double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

/// Decodes a list of complex numbers given as [re, im] pairs or a flat list.
inline ComplexVector decode_complex(const json& list, const std::string& where) {
  if (!list.is_array()) throw ParseError(where + ": expected an array");
  if (list.empty()) return ComplexVector(0);
  if (list.front().is_array()) {
    ComplexVector out(static_cast<Index>(list.size()));
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& pair = list[i];
      const std::string at = where + "[" + std::to_string(i) + "]";
      if (!pair.is_array() || pair.size() != 2) throw ParseError(at + ": expected an [re, im] pair");
      out(static_cast<Index>(i)) = Complex(number_at(pair[0], at + "[0]"), number_at(pair[1], at + "[1]"));
    }
    return out;
  }
  if (list.size() % 2 != 0)
    throw ParseError(where + ": odd number of reals (" + std::to_string(list.size()) +
                     "), unpaired value at offset " + std::to_string(list.size() - 1));
  ComplexVector out(static_cast<Index>(list.size() / 2));
  for (std::size_t i = 0; i < list.size(); i += 2)
    out(static_cast<Index>(i / 2)) = Complex(number_at(list[i], where + "[" + std::to_string(i) + "]"),
                                             number_at(list[i + 1], where + "[" + std::to_string(i + 1) + "]"));
  return out;
}

inline json encode_complex(const Complex* data, Index n) {
  json out = json::array();
  for (Index i = 0; i < n; ++i) out.push_back(json::array({data[i].real(), data[i].imag()}));
  return out;
}

inline Dims decode_dims(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ParseError(where + ": expected a non-empty list of dimensions");
  Dims dims;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() || v[i].get<long long>() < 1)
      throw ParseError(where + "[" + std::to_string(i) + "]: expected a positive integer");
    dims.push_back(v[i].get<int>());
  }
  return dims;
}

inline PureState decode_pure(const json& v, const Dims& dims, const std::string& where) {
  ComplexVector amp = decode_complex(v, where);
  if (amp.size() != total_dim(dims))
    throw ParseError(where + ": expected " + std::to_string(total_dim(dims)) + " amplitudes, got " +
                     std::to_string(amp.size()));
  return PureState(std::move(amp), dims);
}

inline SeparableDecomposition decode_decomposition(const json& v, const Dims& dims) {
  const std::string where = "decomposition";
  if (!v.is_object()) throw ParseError(where + ": expected an object");
  if (dims.size() != 2) throw ParseError(where + ": requires a bipartite state");
  for (const char* key : {"weights", "a_states", "b_states"})
    if (!v.contains(key) || !v[key].is_array()) throw ParseError(where + "." + key + ": missing list");
  SeparableDecomposition d;
  for (std::size_t i = 0; i < v["weights"].size(); ++i)
    d.weights.push_back(number_at(v["weights"][i], where + ".weights[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < v["a_states"].size(); ++i)
    d.a_states.push_back(
        decode_pure(v["a_states"][i], {dims[0]}, where + ".a_states[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < v["b_states"].size(); ++i)
    d.b_states.push_back(
        decode_pure(v["b_states"][i], {dims[1]}, where + ".b_states[" + std::to_string(i) + "]"));
  d.check_shape();
  return d;
}

}  // namespace detail

/// Decodes a state document. Throws ParseError for malformed structure and
/// qshare::Error when the decoded object violates a state invariant.
inline StateFile parse_state(const json& doc) {
  if (!doc.is_object()) throw ParseError("document: expected an object");
  if (!doc.contains("dims")) throw ParseError("dims: missing");
  if (!doc.contains("entries")) throw ParseError("entries: missing");
  StateFile f;
  f.dims = detail::decode_dims(doc["dims"], "dims");
  const std::string kind = doc.value("kind", std::string("density"));
  if (kind == "pure")
    f.kind = StateKind::pure;
  else if (kind != "density")
    throw ParseError("kind: expected \"density\" or \"pure\", got \"" + kind + "\"");
  const Index d = total_dim(f.dims);
  const ComplexVector entries = detail::decode_complex(doc["entries"], "entries");
  if (f.kind == StateKind::pure) {
    if (entries.size() != d)
      throw ParseError("entries: expected " + std::to_string(d) + " amplitudes, got " + std::to_string(entries.size()));
    f.pure = PureState(entries, f.dims);
    f.density = DensityMatrix::from_pure(*f.pure);
  } else {
    if (entries.size() != d * d)
      throw ParseError("entries: expected " + std::to_string(d * d) + " matrix entries, got " +
                       std::to_string(entries.size()));
    ComplexMatrix m(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) m(i, j) = entries(i * d + j);
    f.density = DensityMatrix(std::move(m), f.dims);
  }
  if (doc.contains("decomposition")) f.decomposition = detail::decode_decomposition(doc["decomposition"], f.dims);
  return f;
}

inline StateFile parse_state_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  return parse_state(doc);
}

inline StateFile load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_state_text(ss.str());
}

inline json encode_state(const DensityMatrix& rho) {
  const Index d = rho.dim();
  json entries = json::array();
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) entries.push_back(json::array({rho(i, j).real(), rho(i, j).imag()}));
  return json{{"dims", rho.dims()}, {"kind", "density"}, {"entries", std::move(entries)}};
}

inline json encode_state(const PureState& psi) {
  return json{{"dims", psi.dims()},
              {"kind", "pure"},
              {"entries", detail::encode_complex(psi.amplitudes().data(), psi.dim())}};
}

inline json encode_decomposition(const SeparableDecomposition& d) {
  json a = json::array(), b = json::array();
  for (const auto& s : d.a_states) a.push_back(detail::encode_complex(s.amplitudes().data(), s.dim()));
  for (const auto& s : d.b_states) b.push_back(detail::encode_complex(s.amplitudes().data(), s.dim()));
  return json{{"weights", d.weights}, {"a_states", std::move(a)}, {"b_states", std::move(b)}};
}

inline void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace qshare::io
