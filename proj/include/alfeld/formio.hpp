// Text round-trip format for (piecewise) polynomial forms: one line per
// (sigma, exponent, coefficient) triple, grouped into `cell i` sections for
// piecewise forms.  Sigma indices are 1-based in the text.
#pragma once

#include <istream>
#include <ostream>
#include <sstream>

#include "alfeld/kform.hpp"

namespace alfeld {

inline void write_form_lines(std::ostream& os, const KForm& w) {
  for (const auto& [s, p] : w.comps())
    for (const auto& [e, c] : p.terms()) {
      os << "sigma=";
      for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << (s[i] + 1);
      os << " exp=";
      for (size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << e[i];
      os << " coeff=" << c.str() << "\n";
    }
}

inline void write_piecewise_form(std::ostream& os, const PiecewiseKForm& w, int n, int k) {
  os << "n " << n << "\n";
  os << "k " << k << "\n";
  os << "cells " << w.pieces.size() << "\n";
  for (size_t c = 0; c < w.pieces.size(); ++c) {
    os << "cell " << c << "\n";
    write_form_lines(os, w.pieces[c]);
  }
}

namespace formio_detail {

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  return out;
}

}  // namespace formio_detail

/// Reads a piecewise form over the given split.  Throws std::runtime_error
/// on malformed input.
inline PiecewiseKForm read_piecewise_form(std::istream& in, const AlfeldSplit& split) {
  int n = -1, k = -1, cells = -1, cur_cell = -1;
  std::vector<KForm> pieces;
  std::string line;
  while (std::getline(in, line)) {
    auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    std::istringstream is(line);
    std::string tok;
    if (!(is >> tok)) continue;
    if (tok == "n") {
      if (!(is >> n) || n != split.dim()) throw std::runtime_error("form parse error: bad or mismatched n");
    } else if (tok == "k") {
      if (!(is >> k) || k < 0 || k > n) throw std::runtime_error("form parse error: bad k");
    } else if (tok == "cells") {
      if (!(is >> cells) || cells != split.n_children()) throw std::runtime_error("form parse error: bad cell count");
      pieces.assign(cells, KForm(n, k));
    } else if (tok == "cell") {
      if (!(is >> cur_cell) || cur_cell < 0 || cur_cell >= cells) throw std::runtime_error("form parse error: bad cell index");
    } else if (tok.rfind("sigma=", 0) == 0) {
      if (cur_cell < 0) throw std::runtime_error("form parse error: coefficient line outside a cell section");
      std::string sig_str = tok.substr(6);
      std::string exp_tok, coeff_tok;
      if (!(is >> exp_tok >> coeff_tok) || exp_tok.rfind("exp=", 0) != 0 || coeff_tok.rfind("coeff=", 0) != 0)
        throw std::runtime_error("form parse error: expected 'sigma=... exp=... coeff=...'");
      Sigma sig;
      for (int v : formio_detail::parse_int_list(sig_str)) sig.push_back(v - 1);
      Exponents e;
      for (int v : formio_detail::parse_int_list(exp_tok.substr(4))) e.push_back(v);
      if (static_cast<int>(sig.size()) != k) throw std::runtime_error("form parse error: sigma arity != k");
      if (static_cast<int>(e.size()) != n) throw std::runtime_error("form parse error: exponent arity != n");
      pieces[cur_cell].add_term(sig, Poly::monomial(e, Rational::parse(coeff_tok.substr(6))));
    } else {
      throw std::runtime_error("form parse error: unknown token '" + tok + "'");
    }
  }
  if (n < 0 || k < 0 || cells < 0) throw std::runtime_error("form parse error: incomplete header");
  PiecewiseKForm w;
  w.split = &split;
  w.pieces = std::move(pieces);
  return w;
}

}  // namespace alfeld
