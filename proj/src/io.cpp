#include "spikelab/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "spikelab/mp.hpp"

namespace spikelab::io {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

[[noreturn]] void bad_config(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

void require_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                  const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known = known || it.key() == key;
    if (!known) bad_config(std::string("unknown key \"") + it.key() + "\" in " + where);
  }
}

FamilyKind family_from_name(const std::string& name) {
  for (FamilyKind kind : {FamilyKind::Gaussian, FamilyKind::Rademacher, FamilyKind::UniformSym,
                          FamilyKind::ScaleMixtureGaussian}) {
    if (family_name(kind) == name) return kind;
  }
  bad_config("unknown family kind \"" + name + "\"");
}

std::string tensor_label(const mp::TensorIndex& ix) {
  if (ix.t < 0) return "u" + std::to_string(ix.pack + 1) + "[" + std::to_string(ix.s + 1) + "]";
  return "G" + std::to_string(ix.pack + 1) + "[" + std::to_string(ix.s + 1) + "," +
         std::to_string(ix.t + 1) + "]";
}

ordered_json tensor_json(const mp::CovarianceTensor& tensor) {
  ordered_json out;
  out["labels"] = ordered_json::array();
  for (const auto& ix : tensor.labels) out["labels"].push_back(tensor_label(ix));
  out["matrix"] = ordered_json::array();
  for (int i = 0; i < tensor.cov.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < tensor.cov.cols(); ++j) row.push_back(tensor.cov(i, j));
    out["matrix"].push_back(std::move(row));
  }
  return out;
}

}  // namespace

LoadedConfig parse_config(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    bad_config(std::string("not valid JSON: ") + ex.what());
  }
  if (!doc.is_object()) bad_config("top level must be a JSON object");
  require_keys(doc, {"schema_version", "gamma_sq", "n", "seed", "spikes", "family"}, "config");
  for (const char* key : {"schema_version", "gamma_sq", "n", "spikes", "family"}) {
    if (!doc.contains(key)) bad_config(std::string("missing required key \"") + key + "\"");
  }

  LoadedConfig out;
  if (!doc["schema_version"].is_number_integer()) bad_config("schema_version must be an integer");
  out.schema_version = doc["schema_version"].get<int>();
  if (out.schema_version != 1)
    bad_config("unsupported schema_version " + std::to_string(out.schema_version));

  if (!doc["gamma_sq"].is_number()) bad_config("gamma_sq must be a number");
  out.config.gamma_sq = doc["gamma_sq"].get<double>();
  if (!doc["n"].is_number_integer()) bad_config("n must be an integer");
  out.config.n = doc["n"].get<int>();
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) bad_config("seed must be a nonnegative integer");
    out.seed = doc["seed"].get<std::uint64_t>();
  }

  if (!doc["spikes"].is_array() || doc["spikes"].empty())
    bad_config("spikes must be a nonempty array");
  for (const auto& item : doc["spikes"]) {
    if (!item.is_object()) bad_config("each spike must be an object");
    require_keys(item, {"alpha", "multiplicity"}, "spike");
    if (!item.contains("alpha") || !item["alpha"].is_number())
      bad_config("spike alpha must be a number");
    SpikeSpec spike;
    spike.alpha = item["alpha"].get<double>();
    if (item.contains("multiplicity")) {
      if (!item["multiplicity"].is_number_integer())
        bad_config("spike multiplicity must be an integer");
      spike.multiplicity = item["multiplicity"].get<int>();
    }
    out.config.spikes.push_back(spike);
  }

  const auto& fam = doc["family"];
  if (!fam.is_object() || !fam.contains("kind") || !fam["kind"].is_string())
    bad_config("family must be an object with a string \"kind\"");
  require_keys(fam, {"kind", "r_sq_values", "r_sq_weights"}, "family");
  out.config.family.kind = family_from_name(fam["kind"].get<std::string>());
  if (out.config.family.kind == FamilyKind::ScaleMixtureGaussian) {
    if (!fam.contains("r_sq_values") || !fam.contains("r_sq_weights"))
      bad_config("scale_mixture_gaussian needs r_sq_values and r_sq_weights");
    const auto& vals = fam["r_sq_values"];
    const auto& wts = fam["r_sq_weights"];
    if (!vals.is_array() || vals.size() != 2 || !wts.is_array() || wts.size() != 2)
      bad_config("r_sq_values and r_sq_weights must be two-element arrays");
    out.config.family.mixture.r_sq_a = vals[0].get<double>();
    out.config.family.mixture.r_sq_b = vals[1].get<double>();
    const double wa = wts[0].get<double>();
    const double wb = wts[1].get<double>();
    if (std::abs(wa + wb - 1.0) > 1e-12) bad_config("r_sq_weights must sum to 1");
    out.config.family.mixture.weight_a = wa;
  } else if (fam.contains("r_sq_values") || fam.contains("r_sq_weights")) {
    bad_config("mixture parameters are only valid for scale_mixture_gaussian");
  }

  const auto issues = validate(out.config);
  if (has_errors(issues)) {
    std::string msg = "invalid model:";
    for (const auto& issue : issues)
      if (issue.is_error) msg += " " + issue.message + ";";
    bad_config(msg);
  }
  return out;
}

LoadedConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string config_to_json(const ModelConfig& config, std::uint64_t seed) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["gamma_sq"] = config.gamma_sq;
  doc["n"] = config.n;
  doc["seed"] = seed;
  doc["spikes"] = ordered_json::array();
  for (const auto& spike : config.spikes)
    doc["spikes"].push_back({{"alpha", spike.alpha}, {"multiplicity", spike.multiplicity}});
  doc["family"] = {{"kind", family_name(config.family.kind)}};
  if (config.family.kind == FamilyKind::ScaleMixtureGaussian) {
    doc["family"]["r_sq_values"] = {config.family.mixture.r_sq_a, config.family.mixture.r_sq_b};
    doc["family"]["r_sq_weights"] = {config.family.mixture.weight_a,
                                     1.0 - config.family.mixture.weight_a};
  }
  return doc.dump(2) + "\n";
}

std::string ensemble_csv(const fluctuations::Ensemble& ensemble) {
  std::string out = "replicate,kind,pack,index,value\n";
  auto row = [&out](int replicate, const char* kind, int pack, int index, double value) {
    out += std::to_string(replicate);
    out += ',';
    out += kind;
    out += ',';
    out += std::to_string(pack);
    out += ',';
    out += std::to_string(index);
    out += ',';
    out += format_double(value);
    out += '\n';
  };
  for (const auto& rep : ensemble.stats) {
    for (const auto& pf : rep.packs)
      for (std::size_t s = 0; s < pf.z.size(); ++s)
        row(rep.replicate, "z", pf.pack + 1, static_cast<int>(s) + 1, pf.z[s]);
    for (const auto& vf : rep.vecs) {
      for (std::size_t i = 0; i < vf.entries.size(); ++i)
        row(rep.replicate, "vec", vf.pack + 1, vf.coords[i] + 1, vf.entries[i]);
      row(rep.replicate, "resid", vf.pack + 1, vf.pack + 1, vf.residual);
    }
    for (const auto& af : rep.angles) row(rep.replicate, "angle", af.pack + 1, 1, af.statistic);
  }
  return out;
}

std::string moment_report_csv(const quadrature::MomentReport& report) {
  std::string out = "kind,alpha,alpha_prime,closed,quad,abs_err,rel_err\n";
  for (const auto& e : report.entries) {
    out += quadrature::kind_name(e.kind);
    out += ',';
    if (e.kind != quadrature::Kind::Normalization) out += format_double(e.alpha);
    out += ',';
    if (e.alpha_prime) out += format_double(*e.alpha_prime);
    out += ',';
    out += format_double(e.closed);
    out += ',';
    if (!e.flagged) {
      out += format_double(e.quad);
      out += ',';
      out += format_double(e.abs_err);
      out += ',';
      out += format_double(e.rel_err);
    } else {
      out += ",,";
    }
    out += '\n';
  }
  return out;
}

std::string moment_report_json(const quadrature::MomentReport& report) {
  ordered_json doc;
  doc["rel_tol"] = report.rel_tol;
  doc["max_rel_err"] = report.max_rel_err();
  doc["any_flagged"] = report.any_flagged();
  doc["entries"] = ordered_json::array();
  for (const auto& e : report.entries) {
    ordered_json row;
    row["kind"] = quadrature::kind_name(e.kind);
    row["alpha"] = e.alpha;
    if (e.alpha_prime)
      row["alpha_prime"] = *e.alpha_prime;
    else
      row["alpha_prime"] = nullptr;
    row["closed"] = e.closed;
    row["quad"] = e.quad;
    row["abs_err"] = e.abs_err;
    row["rel_err"] = e.rel_err;
    row["flagged"] = e.flagged;
    row["flag_reason"] = e.flag_reason;
    doc["entries"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string comparison_csv(const stats::ComparisonReport& report) {
  std::string out = "name,empirical,theory,standard_error,z_score,verdict\n";
  for (const auto& row : report.rows) {
    out += row.name;
    out += ',';
    out += format_double(row.empirical);
    out += ',';
    out += format_double(row.theory);
    out += ',';
    out += format_double(row.se);
    out += ',';
    out += format_double(row.z);
    out += ',';
    out += row.pass ? "pass" : "fail";
    out += '\n';
  }
  return out;
}

std::string comparison_json(const stats::ComparisonReport& report) {
  ordered_json doc;
  doc["se_multiplier"] = report.se_multiplier;
  doc["pass"] = report.pass;
  doc["rows"] = ordered_json::array();
  for (const auto& row : report.rows) {
    doc["rows"].push_back({{"name", row.name},
                           {"empirical", row.empirical},
                           {"theory", row.theory},
                           {"standard_error", row.se},
                           {"bias_band", row.bias_band},
                           {"z_score", row.z},
                           {"verdict", row.pass ? "pass" : "fail"}});
  }
  return doc.dump(2) + "\n";
}

namespace {

// Shared assembly for theory_json / theory_csv: per-pack scalars.
struct PackRow {
  double alpha;
  int multiplicity;
  double rho;
  double scaling;
  double fluct_var;     // Var of one z: Var(G_ss) / scaling^2
  double pack_sum_var;  // Var of sum of the pack's z
};

std::vector<PackRow> pack_rows(const ModelConfig& config) {
  const auto packs = mp::pack_theory(config);
  const auto tensor = mp::eigenvalue_cov(config);
  std::vector<PackRow> rows;
  for (std::size_t j = 0; j < packs.size(); ++j) {
    PackRow row{packs[j].alpha, packs[j].multiplicity, packs[j].rho, packs[j].scaling, 0.0, 0.0};
    const int pack = static_cast<int>(j);
    const double s2 = row.scaling * row.scaling;
    row.fluct_var = tensor.at({pack, 0, 0}, {pack, 0, 0}) / s2;
    for (int s = 0; s < row.multiplicity; ++s)
      for (int t = 0; t < row.multiplicity; ++t)
        row.pack_sum_var += tensor.at({pack, s, s}, {pack, t, t});
    row.pack_sum_var /= s2;
    rows.push_back(row);
  }
  return rows;
}

bool all_single(const ModelConfig& config) {
  for (const auto& spike : config.spikes)
    if (spike.multiplicity != 1) return false;
  return true;
}

}  // namespace

std::string theory_json(const ModelConfig& config) {
  const mp::AspectRatio gamma{config.realized_gamma_sq()};
  const mp::MpSea sea = mp::mp_support(gamma);
  const auto rows = pack_rows(config);
  const bool single = all_single(config);

  ordered_json doc;
  doc["gamma_sq"] = gamma.gamma_sq;
  doc["mp_support"] = {{"lambda_minus", sea.lambda_minus}, {"lambda_plus", sea.lambda_plus}};
  doc["packs"] = ordered_json::array();
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& r = rows[j];
    ordered_json pack;
    pack["alpha"] = r.alpha;
    pack["multiplicity"] = r.multiplicity;
    pack["rho"] = r.rho;
    pack["scaling"] = r.scaling;
    pack["fluctuation_variance"] = r.fluct_var;
    pack["pack_sum_variance"] = r.pack_sum_var;
    if (single) {
      const auto angle = mp::angle_theory(config, static_cast<int>(j));
      pack["cos_limit"] = angle.cos_limit;
      pack["angle_variance"] = angle.t_var;
    }
    doc["packs"].push_back(std::move(pack));
  }
  doc["eigenvalue_cov"] = tensor_json(mp::eigenvalue_cov(config));
  if (single) {
    doc["eigenvector_cov"] = tensor_json(mp::eigenvector_cov(config));
    doc["vec_coefficients"] = ordered_json::array();
    const int q = static_cast<int>(config.spikes.size());
    for (int j = 0; j < q; ++j)
      for (int i = 0; i < q; ++i)
        if (i != j)
          doc["vec_coefficients"].push_back({{"pack", j + 1},
                                             {"coord", i + 1},
                                             {"value", mp::vec_coefficient(config, j, i)}});
  }
  return doc.dump(2) + "\n";
}

std::string theory_csv(const ModelConfig& config) {
  const mp::AspectRatio gamma{config.realized_gamma_sq()};
  const mp::MpSea sea = mp::mp_support(gamma);
  const auto rows = pack_rows(config);
  const bool single = all_single(config);

  std::string out = "name,value\n";
  auto line = [&out](const std::string& name, double value) {
    out += name;
    out += ',';
    out += format_double(value);
    out += '\n';
  };
  line("gamma_sq", gamma.gamma_sq);
  line("lambda_minus", sea.lambda_minus);
  line("lambda_plus", sea.lambda_plus);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::string prefix = "pack" + std::to_string(j + 1) + ".";
    const auto& r = rows[j];
    line(prefix + "alpha", r.alpha);
    line(prefix + "multiplicity", r.multiplicity);
    line(prefix + "rho", r.rho);
    line(prefix + "scaling", r.scaling);
    line(prefix + "fluctuation_variance", r.fluct_var);
    line(prefix + "pack_sum_variance", r.pack_sum_var);
    if (single) {
      const auto angle = mp::angle_theory(config, static_cast<int>(j));
      line(prefix + "cos_limit", angle.cos_limit);
      line(prefix + "angle_variance", angle.t_var);
    }
  }
  return out;
}

std::string manifest_json(const RunManifest& manifest) {
  ordered_json doc;
  doc["command"] = manifest.command;
  doc["config_path"] = manifest.config_path;
  doc["config_hash"] = manifest.config_hash;
  doc["master_seed"] = manifest.master_seed;
  doc["replicates"] = manifest.replicates;
  doc["artifacts"] = manifest.artifacts;
  doc["wall_seconds"] = manifest.wall_seconds;
  doc["version"] = manifest.version;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spikelab::io
