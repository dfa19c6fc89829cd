#include "pad/latex.hpp"

#include <algorithm>
#include <sstream>

#include "pad/rng.hpp"

namespace pad {

namespace {

// Style: variation decisions for one rendering.  The canonical style always
// answers 0/false, so canonical output is the all-first-choices rendering.
class Style {
 public:
  static Style canonical() { return Style(); }
  static Style seeded(std::uint64_t seed) {
    Style s;
    s.rng_ = Rng(seed);
    s.live_ = true;
    return s;
  }
  int pick(int n) { return live_ ? static_cast<int>(rng_.uniform_int(0, n - 1)) : 0; }
  bool coin() { return live_ && rng_.uniform_int(0, 1) == 1; }
  template <typename T>
  void perm(std::vector<T>& v) {
    if (!live_) return;
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
      std::swap(v[i], v[static_cast<int>(rng_.uniform_int(0, i))]);
  }

 private:
  Rng rng_{0};
  bool live_ = false;
};

std::string frac(const std::string& a, const std::string& b) {
  return "\\frac{" + a + "}{" + b + "}";
}
std::string prod2(Style& st, const std::string& a, const std::string& b) {
  return st.coin() ? b + " " + a : a + " " + b;
}
std::string prod3(Style& st, const std::string& a, const std::string& b, const std::string& c) {
  std::vector<std::string> f = {a, b, c};
  st.perm(f);
  return f[0] + " " + f[1] + " " + f[2];
}
std::string one_plus(Style& st, const std::string& x) { return st.coin() ? x + "+1" : "1+" + x; }
std::string sum_over(const std::string& i, const std::string& body) {
  return "\\sum_{" + i + "=1}^{M} " + body;
}
std::string plus_join(Style& st, std::vector<std::string> terms) {
  st.perm(terms);
  std::string out = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) out += "+" + terms[i];
  return out;
}

struct Constraint {
  std::string lhs, rel, rhs;
  std::string quant;     // e.g. "m" -> emitted as \;\forall m
  bool swappable = true;  // inequality sides may be exchanged in variants
};

struct Rendered {
  bool maximize = true;
  std::string varlist;  // subscript of \max / \min
  std::string body;
  std::vector<Constraint> cons;
};

Rendered render(ProblemId id, int M_unused, Style& st) {
  (void)M_unused;
  Rendered r;
  auto rate_p1 = [&](const std::string& pm, const std::string& m) {
    return "B \\log_{2}\\left(" +
           one_plus(st, frac(prod2(st, "g_{" + m + "}", pm), prod2(st, "B", "N_{" + m + "}"))) +
           "\\right)";
  };
  auto rate_blocks = [&](const std::string& m) {
    return "B_{" + m + "} b \\log_{2}\\left(" +
           one_plus(st, frac(prod2(st, "g_{" + m + "}", "p_{" + m + "}"),
                             prod3(st, "B_{" + m + "}", "b", "N_{" + m + "}"))) +
           "\\right)";
  };
  switch (id) {
    case ProblemId::P1: {
      r.varlist = "\\{p_{1},\\ldots,p_{M}\\}";
      r.body = sum_over("m", rate_p1("p_{m}", "m"));
      r.cons = {{sum_over("m", "p_{m}"), "\\leq", "P_{\\mathrm{total}}", "", true},
                {rate_p1("p_{m}", "m"), "\\geq", "R_{\\mathrm{min}}", "m", true},
                {"p_{m}", "\\geq", "0", "m", true}};
      break;
    }
    case ProblemId::P2:
    case ProblemId::P4: {
      r.varlist = "\\{B_{1},\\ldots,B_{M}\\}";
      r.body = (id == ProblemId::P2)
                   ? sum_over("m", rate_blocks("m"))
                   : sum_over("m", frac("\\log_{2}\\left(" +
                                            one_plus(st, frac(prod2(st, "g_{m}", "p_{m}"),
                                                              prod3(st, "B_{m}", "b", "N_{m}"))) +
                                            "\\right)",
                                        "B_{m}"));
      r.cons = {{sum_over("m", "B_{m}"), "\\leq", "B_{\\mathrm{total}}", "", true},
                {rate_blocks("m"), "\\geq", "R_{\\mathrm{min}}", "m", true},
                {"B_{m}", "\\in", "\\mathbb{Z}_{\\geq 0}", "m", false}};
      break;
    }
    case ProblemId::P3: {
      r.varlist = "\\{B_{1},\\ldots,B_{M}\\}";
      r.body = sum_over("m", rate_blocks("m"));
      r.cons = {{sum_over("m", "B_{m}"), "\\leq", "B_{\\mathrm{total}}", "", true},
                {frac(rate_blocks("m"), "\\alpha_{m}"), "\\geq", "\\theta", "m", true},
                {"B_{m}", "\\in", "\\mathbb{Z}_{\\geq 0}", "m", false}};
      break;
    }
    case ProblemId::P5: {
      r.varlist = "\\{p_{1},\\ldots,p_{M}\\}";
      r.body = sum_over("m", frac(rate_p1("p_{m}", "m"), "p_{m}"));
      r.cons = {{sum_over("m", "p_{m}"), "\\leq", "P_{\\mathrm{total}}", "", true},
                {rate_p1("p_{m}", "m"), "\\geq", "R_{\\mathrm{min}}", "m", true},
                {"p_{m}", "\\geq", "0", "m", true}};
      break;
    }
    case ProblemId::P6: {
      r.maximize = false;
      r.varlist = "\\{u_{1},\\ldots,u_{M}\\}";
      const std::string lat = sum_over(
          "m", frac(prod2(st, "\\lambda_{m}", "S_{m}"),
                    one_plus(st, frac(prod3(st, "\\Delta_{m}", "u_{m}", "\\mu"), "S_{m}"))));
      r.body = plus_join(st, {lat, frac("L", "1-L"), prod3(st, "\\alpha", "\\mu", "L")});
      r.cons = {{"L", "=", sum_over("m", "u_{m}"), "", false},
                {sum_over("m", "u_{m}"), "\\leq", "0.95", "", true},
                {"u_{m}", "\\geq", "0", "m", true}};
      break;
    }
    case ProblemId::P7: {
      r.varlist = "\\{B_{m},p_{m}\\}";
      r.body = sum_over("m", rate_blocks("m"));
      r.cons = {{sum_over("m", "B_{m}"), "\\leq", "B_{\\mathrm{total}}", "", true},
                {sum_over("m", "p_{m}"), "\\leq", "P_{\\mathrm{total}}", "", true},
                {rate_blocks("m"), "\\geq", "R_{\\mathrm{min}}", "m", true},
                {"B_{m}", "\\in", "\\mathbb{Z}_{\\geq 0}", "m", false},
                {"p_{m}", "\\geq", "0", "m", true}};
      break;
    }
    case ProblemId::P8: {
      r.varlist = "\\{x_{1},\\ldots,x_{M}\\}";
      std::vector<std::string> f = {"\\lambda_{i}", "\\alpha", "s_{i}", "x_{i}"};
      st.perm(f);
      r.body = sum_over("i", f[0] + " " + f[1] + " " + f[2] + " " + f[3]);
      r.cons = {{sum_over("i", prod2(st, "s_{i}", "x_{i}")), "\\leq", "C", "", true},
                {"x_{i}", "\\in", "\\{0,1\\}", "i", false}};
      break;
    }
    case ProblemId::P9: {
      r.maximize = false;
      r.varlist = "\\{D_{m},A_{m}\\}";
      const std::string local = prod2(st, "\\left(1-D_{m}\\right)", "C^{\\mathrm{loc}}_{m}");
      const std::string off =
          "D_{m}\\left(" +
          plus_join(st, {"C^{\\mathrm{tr}}_{m}", frac("C^{\\mathrm{off}}_{m}", "A_{m}")}) +
          "\\right)";
      r.body = sum_over("m", "\\left[" + plus_join(st, {local, off}) + "\\right]");
      r.cons = {{sum_over("m", prod2(st, "D_{m}", "A_{m}")), "\\leq", "1", "", true},
                {"A_{m}", "\\geq", "0", "m", true},
                {"A_{m}", "\\leq", "1", "m", true},
                {"D_{m}", "\\in", "\\{0,1\\}", "m", false}};
      break;
    }
    case ProblemId::P10: {
      r.maximize = false;
      r.varlist = "\\{p_{1},\\ldots,p_{M}\\}";
      r.body = "\\max_{m} \\frac{d_{m}}{" + rate_p1("p_{m}", "m") + "}";
      r.cons = {{sum_over("m", "p_{m}"), "\\leq", "P_{\\mathrm{total}}", "", true},
                {"p_{m}", "\\geq", "0", "m", true}};
      break;
    }
  }
  return r;
}

std::string assemble(ProblemId id, const Rendered& r, Style& st, bool allow_sign_flip,
                     const std::vector<int>& keep) {
  const bool flip = allow_sign_flip && st.coin();
  std::ostringstream os;
  os << "\\mathbb{P}_{" << static_cast<int>(id) << "}:\\quad ";
  const bool shown_max = flip ? !r.maximize : r.maximize;
  os << (shown_max ? "\\max" : "\\min") << "_{" << r.varlist << "} ";
  if (flip)
    os << "-\\left(" << r.body << "\\right)";
  else
    os << r.body;

  std::vector<int> order = keep;
  st.perm(order);
  if (!order.empty()) {
    os << " \\\\\n\\text{s.t.}\\quad ";
    bool first = true;
    for (int ci : order) {
      const Constraint& c = r.cons[ci];
      if (!first) os << ",\\\\\n";
      first = false;
      const bool swap = c.swappable && st.coin();
      auto flip_rel = [](const std::string& rel) {
        return rel == "\\leq" ? "\\geq" : (rel == "\\geq" ? "\\leq" : rel);
      };
      if (swap)
        os << c.rhs << " " << flip_rel(c.rel) << " " << c.lhs;
      else
        os << c.lhs << " " << c.rel << " " << c.rhs;
      if (!c.quant.empty()) os << " \\;\\forall " << c.quant;
    }
  }
  return os.str();
}

std::string emit_with_style(ProblemId id, Style st, bool sign_flip, const std::vector<int>& keep) {
  // One Style drives both the sub-expression rendering and the assembly;
  // decision order is fixed, so output is a pure function of the seed.
  Rendered r = render(id, 0, st);
  return assemble(id, r, st, sign_flip, keep);
}

std::vector<int> all_indices(ProblemId id) {
  Style st = Style::canonical();
  Rendered r = render(id, 0, st);
  std::vector<int> keep(r.cons.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = static_cast<int>(i);
  return keep;
}

}  // namespace

std::string emit_latex(ProblemId id, LatexVariant variant, int k) {
  if (k < 0) fail(ErrorKind::schema, "latex variant index must be >= 0");
  const std::vector<int> all = all_indices(id);
  switch (variant) {
    case LatexVariant::canonical:
      return emit_with_style(id, Style::canonical(), false, all);
    case LatexVariant::equivalent: {
      const std::string canon = emit_latex(id, LatexVariant::canonical);
      for (int salt = 0;; ++salt) {
        Style st = Style::seeded(derive_seed(0xE9, "eq", static_cast<int>(id), k, salt));
        const std::string out = emit_with_style(id, st, true, all);
        if (out != canon) return out;
      }
    }
    case LatexVariant::constraint_missing: {
      Style st = Style::seeded(derive_seed(0xE9, "miss", static_cast<int>(id), k));
      std::vector<int> keep;
      if (k > 0) {
        // Drop 1 + (k-1) mod n constraints, chosen by a seeded shuffle.
        const int n = static_cast<int>(all.size());
        const int drop = 1 + (k - 1) % n;
        std::vector<int> order = all;
        st.perm(order);
        keep.assign(order.begin() + drop, order.end());
        std::sort(keep.begin(), keep.end());
      }
      return emit_with_style(id, st, false, keep);
    }
  }
  fail(ErrorKind::schema, "unknown latex variant");
}

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Slurp a balanced {...} group starting at s[i] == '{'; returns one past '}'.
std::size_t balanced(const std::string& s, std::size_t i) {
  int depth = 0;
  for (; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) return i + 1;
  }
  fail(ErrorKind::schema, "unbalanced braces in LaTeX");
}

std::vector<std::string> lex(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto slurp_scripts = [&](std::size_t j, std::string& tok) {
    while (j + 1 < s.size() && (s[j] == '_' || s[j] == '^') && s[j + 1] == '{') {
      const std::size_t end = balanced(s, j + 1);
      tok += s.substr(j, end - j);
      j = end;
    }
    return j;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\n' || c == '\t') {
      ++i;
      continue;
    }
    if (c == '\\') {
      if (i + 1 < s.size() && !is_letter(s[i + 1])) {
        ++i;
        if (i < s.size() && (s[i] == '\\' || s[i] == ' ' || s[i] == ';' || s[i] == ',' ||
                             s[i] == '!'))
          ++i;  // spacing / row break
        continue;
      }
      std::size_t j = i + 1;
      while (j < s.size() && is_letter(s[j])) ++j;
      std::string tok = s.substr(i, j - i);
      if (tok == "\\left" || tok == "\\right" || tok == "\\quad") {
        i = j;
        continue;
      }
      // Commands like \mathbb{..}, \mathrm{..} keep their argument attached.
      if (j < s.size() && s[j] == '{' && (tok == "\\mathbb" || tok == "\\mathrm" ||
                                          tok == "\\frac" || tok == "\\text")) {
        if (tok == "\\frac") {  // leave numerator/denominator as flat groups
          out.push_back(tok);
          i = j;
          continue;
        }
        std::size_t end = balanced(s, j);
        tok += s.substr(j, end - j);
        j = end;
      }
      j = slurp_scripts(j, tok);
      out.push_back(tok);
      i = j;
      continue;
    }
    if (is_letter(c)) {
      std::size_t j = i + 1;
      std::string tok = s.substr(i, 1);
      j = slurp_scripts(j, tok);
      out.push_back(tok);
      i = j;
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < s.size() && (is_digit(s[j]) || s[j] == '.')) ++j;
      out.push_back(s.substr(i, j - i));
      i = j;
      continue;
    }
    out.push_back(std::string(1, c));
    ++i;
  }
  return out;
}

}  // namespace

LatexFingerprint latex_fingerprint(const std::string& latex) {
  LatexFingerprint fp;
  const std::string marker = "\\text{s.t.}";
  const std::size_t split = latex.find(marker);
  const std::string head = latex.substr(0, split == std::string::npos ? latex.size() : split);

  std::vector<std::string> htoks = lex(head);
  std::string sense, varlist;
  std::vector<std::string> body;
  for (std::size_t i = 0; i < htoks.size(); ++i) {
    const std::string& t = htoks[i];
    if (sense.empty() && (t.rfind("\\max", 0) == 0 || t.rfind("\\min", 0) == 0)) {
      sense = t.rfind("\\max", 0) == 0 ? "max" : "min";
      varlist = t.substr(4);
      continue;
    }
    if (!sense.empty()) body.push_back(t);
  }
  // Sign-flipped objective: min -(f) == max f (and vice versa).
  if (body.size() >= 3 && body.front() == "-" && body[1] == "(" && body.back() == ")") {
    body.erase(body.begin(), body.begin() + 2);
    body.pop_back();
    sense = (sense == "max") ? "min" : "max";
  }
  std::sort(body.begin(), body.end());
  fp.objective.push_back("sense:" + sense);
  fp.objective.push_back("vars:" + varlist);
  fp.objective.insert(fp.objective.end(), body.begin(), body.end());

  if (split != std::string::npos) {
    std::string tail = latex.substr(split + marker.size());
    std::vector<std::string> parts;
    const std::string sep = ",\\\\\n";
    std::size_t pos = 0;
    while (true) {
      const std::size_t nxt = tail.find(sep, pos);
      parts.push_back(tail.substr(pos, nxt == std::string::npos ? std::string::npos : nxt - pos));
      if (nxt == std::string::npos) break;
      pos = nxt + sep.size();
    }
    for (const std::string& part : parts) {
      std::vector<std::string> toks = lex(part);
      std::vector<std::string> quant;
      for (std::size_t i = 0; i < toks.size();) {
        if (toks[i] == "\\forall") {
          quant.push_back("Q:\\forall");
          if (i + 1 < toks.size()) quant.push_back("Q:" + toks[i + 1]);
          toks.erase(toks.begin() + static_cast<long>(i),
                     toks.begin() + static_cast<long>(std::min(i + 2, toks.size())));
        } else {
          ++i;
        }
      }
      std::size_t rel = toks.size();
      for (std::size_t i = 0; i < toks.size(); ++i)
        if (toks[i] == "\\leq" || toks[i] == "\\geq" || toks[i] == "=" || toks[i] == "\\in") {
          rel = i;
          break;
        }
      std::vector<std::string> entry = quant;
      if (rel == toks.size()) {
        for (auto& t : toks) entry.push_back("T:" + t);
        entry.push_back("rel:none");
      } else {
        std::vector<std::string> lhs(toks.begin(), toks.begin() + static_cast<long>(rel));
        std::vector<std::string> rhs(toks.begin() + static_cast<long>(rel) + 1, toks.end());
        std::string r = toks[rel];
        if (r == "\\geq") {
          std::swap(lhs, rhs);
          r = "\\leq";
        }
        entry.push_back("rel:" + r);
        for (auto& t : lhs) entry.push_back("L:" + t);
        for (auto& t : rhs) entry.push_back("R:" + t);
      }
      std::sort(entry.begin(), entry.end());
      fp.constraints.push_back(std::move(entry));
    }
    std::sort(fp.constraints.begin(), fp.constraints.end());
  }
  return fp;
}

}  // namespace pad
