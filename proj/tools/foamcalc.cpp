// Command-line front end: parses the text DSL for webs, foams, and dotted
// closures, runs the engine, and reports JSON on standard output.
//
// Exit codes: 0 success, 1 check failure, 2 input error.
// FOAMCALC_CUTOFF overrides the default doubled degree cutoff (12).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "foamcalc/dsl.hpp"
#include "foamcalc/foams.hpp"
#include "foamcalc/glnoracle.hpp"
#include "foamcalc/qcomb.hpp"
#include "foamcalc/rho.hpp"
#include "foamcalc/selftest.hpp"
#include "foamcalc/soergel.hpp"
#include "foamcalc/webdecomp.hpp"
#include "foamcalc/webs.hpp"

namespace fc = foamcalc;
using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Web references inside foam/trace files resolve relative to the file that
/// names them.
fc::FileLoader loader_for(const std::string& path) {
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  return [base](const std::string& ref) {
    std::filesystem::path p(ref);
    if (p.is_relative()) p = base / p;
    return read_file(p.string());
  };
}

int env_cutoff() {
  if (const char* s = std::getenv("FOAMCALC_CUTOFF")) {
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      throw InputError("FOAMCALC_CUTOFF is not an integer: '" +
                       std::string(s) + "'");
    }
  }
  return 12;
}

json matrix_json(const fc::Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c).str());
    rows.push_back(std::move(row));
  }
  return rows;
}

json class_json(const fc::WebClass& cls) {
  json out = json::array();
  for (const auto& [comp, coeff] : cls.terms)
    out.push_back({{"cut", comp.str()}, {"multiplicity", coeff.str()}});
  return out;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---- subcommands ---------------------------------------------------------

int cmd_validate(const std::string& file) {
  std::string text = read_file(file);
  json out{{"command", "validate"}, {"input", file}, {"ok", true}};
  switch (fc::classify_dsl(text)) {
    case fc::DslKind::Web: {
      fc::BlWeb w = fc::parse_web(text);
      out["kind"] = "web";
      out["level"] = w.level();
      out["source"] = w.source().str();
      out["target"] = w.target().str();
      out["layers"] = w.num_layers();
      break;
    }
    case fc::DslKind::Foam: {
      fc::FoamWord F = fc::parse_foam(text, loader_for(file));
      out["kind"] = "foam";
      out["source_web"] = F.source().str();
      out["target_web"] = F.target().str();
      out["generators"] = F.num_gens();
      out["degree_doubled"] = F.degree_doubled();
      break;
    }
    case fc::DslKind::Trace: {
      fc::CappedTraceFoam G = fc::parse_trace(text, loader_for(file));
      out["kind"] = "trace";
      out["web"] = G.web.str();
      out["dots"] = G.dots.size();
      break;
    }
  }
  emit(out);
  return 0;
}

int cmd_degree(const std::string& file) {
  fc::FoamWord F = fc::parse_foam(read_file(file), loader_for(file));
  long d = F.degree_doubled();
  long oracle = fc::cw_degree_doubled(F);
  json gens = json::array();
  for (const auto& g : F.gens())
    gens.push_back({{"generator", g.str()}, {"degree_doubled", g.degree_doubled()}});
  emit({{"command", "degree"},
        {"input", file},
        {"degree_doubled", d},
        {"q_degree", d / 2.0},
        {"surface_oracle_doubled", oracle},
        {"oracle_agrees", d == oracle},
        {"generators", gens}});
  return d == oracle ? 0 : 1;
}

int cmd_decompose(const std::string& file, const std::string& oracle_range,
                  const std::string& strategy) {
  fc::BlWeb w = fc::parse_web(read_file(file));
  fc::AnnularWeb aw(w);  // throws if the word does not close up
  fc::QRStrategy strat;
  if (strategy == "first")
    strat = fc::QRStrategy::First;
  else if (strategy == "last")
    strat = fc::QRStrategy::Last;
  else
    throw InputError("unknown strategy '" + strategy + "'");
  fc::DecompositionResult res = fc::qr_decompose(aw, strat);
  json out{{"command", "decompose"},
           {"input", file},
           {"cut", w.source().str()},
           {"positive", class_json(res.positive)},
           {"negative", class_json(res.negative)},
           {"steps", res.steps}};
  bool ok = true;
  if (!oracle_range.empty()) {
    auto dots = oracle_range.find("..");
    if (dots == std::string::npos)
      throw InputError("--oracle-range expects N1..N2");
    int n1, n2;
    try {
      n1 = std::stoi(oracle_range.substr(0, dots));
      n2 = std::stoi(oracle_range.substr(dots + 2));
    } catch (const std::exception&) {
      throw InputError("--oracle-range expects N1..N2");
    }
    // at q=1: trace_N(w) + sum of negative multiplicities times products of
    // binomials equals the positive side
    auto side = [&](const fc::WebClass& cls, int N) {
      fc::Rational total(0);
      for (const auto& [comp, coeff] : cls.terms) {
        fc::Rational prod = coeff.eval_at_one();
        for (int i = 0; i < comp.length(); ++i)
          prod = prod * fc::Rational(fc::binomial(N, comp[i]));
        total += prod;
      }
      return total;
    };
    json oracle = json::array();
    for (int N = n1; N <= n2; ++N) {
      fc::Rational lhs = fc::annular_trace(aw, N) + side(res.negative, N);
      fc::Rational rhs = side(res.positive, N);
      bool match = lhs == rhs;
      ok = ok && match;
      oracle.push_back({{"N", N},
                        {"trace_plus_negative", lhs.str()},
                        {"positive", rhs.str()},
                        {"match", match}});
    }
    out["oracle"] = oracle;
  }
  out["ok"] = ok;
  emit(out);
  return ok ? 0 : 1;
}

int cmd_homdim(const std::string& file0, const std::string& file1, int deg,
               bool deg_given, int cutoff) {
  fc::BlWeb w0 = fc::parse_web(read_file(file0));
  fc::BlWeb w1 = fc::parse_web(read_file(file1));
  json dims = json::array();
  auto one = [&](fc::HalfInt d) {
    fc::HomResult r = fc::hom_graded_dim(w0, w1, d);
    if (r.dim != 0 || deg_given)
      dims.push_back({{"degree_doubled", d},
                      {"dim", r.dim},
                      {"certified", r.certified}});
  };
  if (deg_given) {
    one(deg);
  } else {
    for (fc::HalfInt d = -cutoff; d <= cutoff; ++d) one(d);
  }
  emit({{"command", "homdim"},
        {"web0", file0},
        {"web1", file1},
        {"cutoff_doubled", cutoff},
        {"dims", dims}});
  return 0;
}

int cmd_rho(const std::string& file, const std::string& element_file,
            int cutoff) {
  fc::FoamWord F = fc::parse_foam(read_file(file), loader_for(file));
  int mmax = static_cast<int>(
      std::max(0L, (cutoff + F.source().shift_doubled()) / 4));
  fc::BimoduleMap f = fc::rho_foam(F, mmax);
  json blocks = json::array();
  for (const auto& [m, mat] : f.blocks) {
    auto tm = f.target_m(m);
    blocks.push_back({{"source_m", m},
                      {"target_m", tm ? json(*tm) : json(nullptr)},
                      {"rows", mat.rows},
                      {"cols", mat.cols},
                      {"entries", matrix_json(mat)}});
  }
  json out{{"command", "rho"},
           {"input", file},
           {"source_web", F.source().str()},
           {"target_web", F.target().str()},
           {"degree_doubled", f.degree_doubled},
           {"mmax", f.mmax},
           {"blocks", blocks}};
  if (!element_file.empty()) {
    // the element file uses the dotted-closure syntax; its decorations give
    // one element of the source web's bimodule
    fc::CappedTraceFoam E =
        fc::parse_trace(read_file(element_file), loader_for(element_file));
    if (E.web.str() != F.source().str())
      throw InputError("element web does not match the foam's source web");
    int k = E.web.level();
    std::vector<fc::MultiPoly> tuple(E.web.num_layers() + 1,
                                     fc::MultiPoly::one(k));
    int total = 0;
    for (const auto& [hs, p] : E.dots) {
      if (!p.is_homogeneous())
        throw InputError("element decorations must be homogeneous");
      const fc::Composition& c = E.web.comp_at(hs.first);
      tuple[hs.first] =
          tuple[hs.first] *
          fc::rhodetail::embed_at(
              p, k, fc::rhodetail::slot_offset(c, hs.second));
      total += p.degree();
    }
    if (total > mmax)
      throw InputError("element degree exceeds the cutoff; raise it");
    fc::BimodulePieces& P0 = fc::shared_pieces(F.source());
    auto v = P0.coords(total, tuple);
    json elem{{"input", element_file}, {"source_m", total}};
    json coords = json::array();
    for (const auto& x : v) coords.push_back(x.str());
    elem["coords"] = coords;
    auto bit = f.blocks.find(total);
    auto tm = f.target_m(total);
    if (bit != f.blocks.end() && tm) {
      const fc::Mat& B = bit->second;
      json img = json::array();
      fc::BimodulePieces& Pt = fc::shared_pieces(F.target());
      auto reps = Pt.basis_decors(*tm);
      for (int r = 0; r < B.rows; ++r) {
        fc::Rational acc(0);
        for (int c2 = 0; c2 < B.cols; ++c2) acc += B.at(r, c2) * v[c2];
        if (acc == 0) continue;
        json tup = json::array();
        for (const auto& p : reps[r]) tup.push_back(p.str());
        img.push_back({{"coeff", acc.str()}, {"basis_tuple", tup}});
      }
      elem["image_m"] = *tm;
      elem["image"] = img;
    } else {
      elem["image"] = json::array();
    }
    out["element"] = elem;
  }
  emit(out);
  return 0;
}

int cmd_reduce(const std::string& file) {
  std::string text = read_file(file);
  fc::CappedTraceFoam G;
  switch (fc::classify_dsl(text)) {
    case fc::DslKind::Trace:
      G = fc::parse_trace(text, loader_for(file));
      break;
    case fc::DslKind::Foam: {
      // a movie of pure decorations on an endo-web is the same data
      fc::FoamWord F = fc::parse_foam(text, loader_for(file));
      if (!(F.source().source() == F.source().target()))
        throw InputError("reduce: the foam's web must close up annularly");
      G.web = F.source();
      for (const auto& g : F.gens()) {
        if (g.kind != fc::FoamKind::Dot)
          throw InputError(
              "reduce: only decoration generators make sense on a closure; "
              "use the dotted-closure syntax for plain webs");
        auto key = std::make_pair(g.height, g.slot);
        auto it = G.dots.find(key);
        if (it == G.dots.end())
          G.dots.emplace(key, g.decor);
        else
          it->second = it->second * g.decor;
      }
      fc::validate_trace_dots(G);
      break;
    }
    case fc::DslKind::Web:
      G.web = fc::parse_web(text);
      if (!(G.web.source() == G.web.target()))
        throw InputError("reduce: the web must close up annularly");
      break;
  }
  json disks = json::array();
  for (const auto& [coeff, decs] : fc::annular_reduce(G)) {
    json tup = json::array();
    for (const auto& p : decs) tup.push_back(p.str());
    disks.push_back({{"coeff", coeff.str()}, {"decorations", tup}});
  }
  emit({{"command", "reduce"},
        {"input", file},
        {"cut", G.web.target().str()},
        {"disks", disks}});
  return 0;
}

int cmd_trace(const std::string& file, int N) {
  fc::BlWeb w = fc::parse_web(read_file(file));
  fc::AnnularWeb aw(w);
  emit({{"command", "trace"},
        {"input", file},
        {"N", N},
        {"trace", fc::annular_trace(aw, N).str()}});
  return 0;
}

int cmd_verify_ff(const std::string& file0, const std::string& file1,
                  int dmax) {
  fc::BlWeb w0 = fc::parse_web(read_file(file0));
  fc::BlWeb w1 = fc::parse_web(read_file(file1));
  fc::FullyFaithfulReport rep = fc::verify_fully_faithful(w0, w1, dmax);
  auto dim_map = [](const std::map<fc::HalfInt, int>& m) {
    json out = json::object();
    for (const auto& [d, n] : m) out[std::to_string(d)] = n;
    return out;
  };
  emit({{"command", "verify-ff"},
        {"web0", file0},
        {"web1", file1},
        {"dmax_doubled", dmax},
        {"matched", rep.matched},
        {"certified", rep.certified},
        {"bend_shift_doubled", rep.bend_shift_doubled},
        {"bent_web", rep.bent.str()},
        {"hom_dims", dim_map(rep.hom_dims)},
        {"bent_hom_dims", dim_map(rep.bent_hom_dims)},
        {"central_dims", dim_map(rep.central_dims)},
        {"note", rep.note}});
  return rep.matched ? 0 : 1;
}

int cmd_selftest(const std::string& corpus) {
  json checks = json::array();
  bool all = true;
  fc::run_selftest(corpus, [&](const fc::SelfCheck& r) {
    std::cerr << (r.pass ? "PASS" : "FAIL") << ": " << r.name << " ("
              << r.detail << ")\n";
    checks.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
  });
  emit({{"command", "selftest"},
        {"corpus", corpus},
        {"checks", checks},
        {"pass", all}});
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact engine for annular webs, foams, and their bimodules"};
  app.require_subcommand(1);

  std::string file, file1, element, oracle_range, strategy = "first";
  std::string corpus = "corpus";
  int N = 4, deg = 0, cutoff_flag = -1;

  auto* validate = app.add_subcommand("validate", "parse and describe an input file");
  validate->add_option("file", file, "web, foam, or trace file")->required();

  auto* degree = app.add_subcommand("degree", "degree of a foam word, with the surface oracle");
  degree->add_option("file", file, "foam file")->required();

  auto* decompose = app.add_subcommand("decompose", "decompose an annular web into positive and negative classes");
  decompose->add_option("file", file, "web file whose word closes up")->required();
  decompose->add_option("--oracle-range", oracle_range, "check the q=1 trace identity for N1..N2");
  decompose->add_option("--strategy", strategy, "rewrite site choice: first|last");

  auto* homdim = app.add_subcommand("homdim", "graded hom dimensions between two webs");
  homdim->add_option("web0", file, "source web file")->required();
  homdim->add_option("web1", file1, "target web file")->required();
  auto* deg_opt = homdim->add_option("--deg", deg, "single doubled degree to report");
  homdim->add_option("--cutoff", cutoff_flag, "doubled degree cutoff");

  auto* rho = app.add_subcommand("rho", "block matrices of the chain map of a foam word");
  rho->add_option("file", file, "foam file")->required();
  rho->add_option("--element", element, "dotted-closure file naming an element of the source");
  rho->add_option("--cutoff", cutoff_flag, "doubled degree cutoff");

  auto* reduce = app.add_subcommand("reduce", "annular reduction of a dotted closure into decorated disks");
  reduce->add_option("file", file, "trace file (or a pure-decoration foam)")->required();

  auto* trace = app.add_subcommand("trace", "exterior-power trace of an annular web");
  trace->add_option("file", file, "web file whose word closes up")->required();
  trace->add_option("--N", N, "rank of the vector representation")->required();

  auto* verify = app.add_subcommand("verify-ff", "compare hom dimensions across bending and central ranks");
  verify->add_option("web0", file, "first web file")->required();
  verify->add_option("web1", file1, "second web file")->required();
  verify->add_option("--deg", deg, "doubled degree bound");

  auto* selftest = app.add_subcommand("selftest", "run the full invariant suite");
  selftest->add_option("--corpus", corpus, "directory of shipped web files");

  CLI11_PARSE(app, argc, argv);

  try {
    int cutoff = cutoff_flag >= 0 ? cutoff_flag : env_cutoff();
    if (validate->parsed()) return cmd_validate(file);
    if (degree->parsed()) return cmd_degree(file);
    if (decompose->parsed()) return cmd_decompose(file, oracle_range, strategy);
    if (homdim->parsed())
      return cmd_homdim(file, file1, deg, !deg_opt->empty(), cutoff);
    if (rho->parsed()) return cmd_rho(file, element, cutoff);
    if (reduce->parsed()) return cmd_reduce(file);
    if (trace->parsed()) return cmd_trace(file, N);
    if (verify->parsed())
      return cmd_verify_ff(file, file1, verify->count("--deg") ? deg : cutoff);
    if (selftest->parsed()) return cmd_selftest(corpus);
  } catch (const fc::ParseError& e) {
    emit({{"error", e.what()}, {"line", e.line}, {"col", e.col}});
    return 2;
  } catch (const InputError& e) {
    emit({{"error", e.what()}});
    return 2;
  } catch (const std::invalid_argument& e) {
    emit({{"error", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    emit({{"error", e.what()}});
    return 1;
  }
  return 2;
}
