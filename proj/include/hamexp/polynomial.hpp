#ifndef HAMEXP_POLYNOMIAL_HPP
#define HAMEXP_POLYNOMIAL_HPP

#include <numeric>
#include <stdexcept>
#include <vector>

#include "hamexp/model.hpp"

namespace hamexp {

/// One monomial coeff * prod_j x_j^{exponents[j]} of a multivariate
/// polynomial field component.
struct PolyTerm {
  std::vector<int> exponents;
  double coeff = 0.0;
};

using PolyComponent = std::vector<PolyTerm>;

inline void validate_poly_component(const PolyComponent& comp, int dim,
                                    int max_degree = 4) {
  for (const PolyTerm& term : comp) {
    if (static_cast<int>(term.exponents.size()) != dim)
      throw std::invalid_argument("polynomial term: exponent list must have one entry per state dimension");
    int total = 0;
    for (int e : term.exponents) {
      if (e < 0) throw std::invalid_argument("polynomial term: negative exponent");
      total += e;
    }
    if (total > max_degree)
      throw std::invalid_argument("polynomial term: total degree exceeds " + std::to_string(max_degree));
  }
}

inline double poly_eval(const PolyComponent& comp, const Vec& x) {
  double s = 0.0;
  for (const PolyTerm& term : comp) {
    double v = term.coeff;
    for (std::size_t j = 0; j < term.exponents.size(); ++j)
      for (int e = 0; e < term.exponents[j]; ++e) v *= x[static_cast<int>(j)];
    s += v;
  }
  return s;
}

/// Partial derivative d/dx_j of one component, as another component.
inline PolyComponent poly_derivative(const PolyComponent& comp, int j) {
  PolyComponent out;
  for (const PolyTerm& term : comp) {
    const int e = term.exponents[static_cast<std::size_t>(j)];
    if (e == 0) continue;
    PolyTerm d = term;
    d.coeff *= e;
    d.exponents[static_cast<std::size_t>(j)] = e - 1;
    out.push_back(std::move(d));
  }
  return out;
}

/// Vector field R^dim -> R^n from per-component polynomial lists, with its
/// analytic Jacobian.
struct PolyVectorField {
  std::vector<PolyComponent> components;           // n entries
  std::vector<std::vector<PolyComponent>> jac;     // n x dim entries
  int dim = 0;

  Vec operator()(const Vec& x) const {
    Vec v(static_cast<int>(components.size()));
    for (std::size_t i = 0; i < components.size(); ++i)
      v[static_cast<int>(i)] = poly_eval(components[i], x);
    return v;
  }

  Mat jacobian(const Vec& x) const {
    Mat m(static_cast<int>(components.size()), dim);
    for (std::size_t i = 0; i < components.size(); ++i)
      for (int j = 0; j < dim; ++j) m(static_cast<int>(i), j) = poly_eval(jac[i][static_cast<std::size_t>(j)], x);
    return m;
  }
};

inline PolyVectorField make_poly_vector_field(std::vector<PolyComponent> components, int dim) {
  PolyVectorField f;
  f.dim = dim;
  for (const PolyComponent& comp : components) validate_poly_component(comp, dim);
  f.jac.resize(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    f.jac[i].resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) f.jac[i][static_cast<std::size_t>(j)] = poly_derivative(components[i], j);
  }
  f.components = std::move(components);
  return f;
}

}  // namespace hamexp

#endif  // HAMEXP_POLYNOMIAL_HPP
