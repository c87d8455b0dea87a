#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dclm {

enum class TNorm { Product, Minimum, Lukasiewicz };
enum class LogicOp { And, Or, Not, Implies };

inline const char* to_string(TNorm v) {
  switch (v) {
    case TNorm::Product: return "product";
    case TNorm::Minimum: return "minimum";
    case TNorm::Lukasiewicz: return "lukasiewicz";
  }
  return "?";
}

inline TNorm tnorm_from_string(const std::string& s) {
  if (s == "product") return TNorm::Product;
  if (s == "minimum") return TNorm::Minimum;
  if (s == "lukasiewicz") return TNorm::Lukasiewicz;
  throw std::invalid_argument("unknown t-norm variant: " + s);
}

// Fuzzy connectives over truth values in [0,1].
//   variant      and            or             not    implies
//   Product      a*b            a+b-a*b        1-a    a==0 ? 1 : min(1, b/a)
//   Minimum      min(a,b)       max(a,b)       1-a    a<=b ? 1 : b
//   Lukasiewicz  max(0,a+b-1)   min(1,a+b)     1-a    min(1, 1-a+b)
// `b` is ignored for Not.
inline double t_norm(TNorm variant, LogicOp op, double a, double b = 0.0) {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string("truth value ") + name + " outside [0,1]: " +
                                  std::to_string(v));
    }
  };
  check(a, "a");
  if (op != LogicOp::Not) check(b, "b");

  switch (op) {
    case LogicOp::Not:
      return 1.0 - a;
    case LogicOp::And:
      switch (variant) {
        case TNorm::Product: return a * b;
        case TNorm::Minimum: return std::min(a, b);
        case TNorm::Lukasiewicz: return std::max(0.0, a + b - 1.0);
      }
      break;
    case LogicOp::Or:
      switch (variant) {
        case TNorm::Product: return a + b - a * b;
        case TNorm::Minimum: return std::max(a, b);
        case TNorm::Lukasiewicz: return std::min(1.0, a + b);
      }
      break;
    case LogicOp::Implies:
      switch (variant) {
        case TNorm::Product: return a == 0.0 ? 1.0 : std::min(1.0, b / a);
        case TNorm::Minimum: return a <= b ? 1.0 : b;
        case TNorm::Lukasiewicz: return std::min(1.0, 1.0 - a + b);
      }
      break;
  }
  throw std::logic_error("unreachable t-norm case");
}

}  // namespace dclm
