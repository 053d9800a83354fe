/*
 * Copyright 2026 The enzkg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: gen-synth, build-graph, train, evaluate, predict
// and fuse.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "enzkg/checkpoint.hpp"
#include "enzkg/config.hpp"
#include "enzkg/evaluator.hpp"
#include "enzkg/experts.hpp"
#include "enzkg/hypergraph.hpp"
#include "enzkg/kg_core.hpp"
#include "enzkg/model.hpp"
#include "enzkg/synth.hpp"
#include "enzkg/trainer.hpp"

namespace fs = std::filesystem;
using namespace enzkg;

namespace {

// Thrown for flag combinations CLI11 cannot express.
class UsageError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "usage"; }
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

EquationKG load_kg(const std::string& data, const std::string& incomplete) {
  EquationKG kg;
  for (const std::string& path : {data, incomplete}) {
    if (path.empty()) continue;
    std::ifstream in(path);
    if (!in) throw Error("cannot open equation file " + path);
    read_equations(in, format_from_path(path), kg);
  }
  return kg;
}

// Name-based key, independent of the interning order of either file.
std::string canonical(const EquationKG& kg, const EquationTriple& t) {
  auto side = [&](const std::vector<CompoundId>& ids) {
    std::vector<std::string> names;
    for (CompoundId c : ids) names.push_back(kg.compounds().name(c));
    std::sort(names.begin(), names.end());
    std::string s;
    for (const auto& n : names) s += n + ';';
    return s;
  };
  return side(t.educts) + '\t' + kg.enzymes().name(*t.enzyme) + '\t' + side(t.products);
}

std::vector<std::size_t> match_holdout(const EquationKG& kg, const std::string& path) {
  const EquationKG held = parse_equation_file(path, format_from_path(path));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < kg.complete().size(); ++i) index[canonical(kg, kg.complete()[i])] = i;
  std::vector<std::size_t> out;
  for (const EquationTriple& t : held.complete()) {
    auto it = index.find(canonical(held, t));
    if (it == index.end()) throw Error("held-out equation not in the data: " + held.format(t));
    out.push_back(it->second);
  }
  return out;
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool homogeneous = false;
  std::string decoder;
  std::string encoder;
  std::optional<std::size_t> epochs;
};

TrainConfig resolve_config(const CommonFlags& f) {
  TrainConfig c;
  if (!f.config.empty()) apply_config(read_config_file(f.config), c);
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.homogeneous) c.homogeneous = true;
  if (!f.decoder.empty()) c.decoder = parse_decoder(f.decoder);
  if (!f.encoder.empty()) c.encoder = parse_encoder(f.encoder);
  if (f.epochs) c.max_epochs = *f.epochs;
  return c;
}

const std::vector<std::size_t>& split_part(const Model& m, const std::string& name) {
  if (name == "train") return m.split.train;
  if (name == "valid") return m.split.valid;
  if (name == "test") return m.split.test;
  throw UsageError("unknown split '" + name + "' (train, valid, test)");
}

std::vector<CompoundId> compound_ids(const Model& m, const std::string& list,
                                     std::vector<std::string>& unknown) {
  std::vector<CompoundId> ids;
  for (const auto& name : split_list(list, ',')) {
    if (auto id = m.kg.compounds().find(name)) {
      ids.push_back(*id);
    } else {
      unknown.push_back(name);
    }
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypergraph-enhanced knowledge graph embedding for enzyme prediction"};
  app.require_subcommand(1);

  // gen-synth
  SyntheticSpec spec;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Write a synthetic equation KG");
  gen->add_option("--compounds", spec.num_compounds, "Number of compounds");
  gen->add_option("--enzymes", spec.num_enzymes, "Number of enzymes");
  gen->add_option("--complete", spec.num_complete, "Complete equations");
  gen->add_option("--incomplete", spec.num_incomplete, "Incomplete equations");
  gen->add_option("--mean-educts", spec.mean_educts, "Mean educt set size");
  gen->add_option("--mean-products", spec.mean_products, "Mean product set size");
  gen->add_option("--pool-size", spec.pool_size, "Compound pool per enzyme and side");
  gen->add_option("--symmetric", spec.symmetric_fraction, "Fraction of symmetric enzymes");
  gen->add_option("--inverse", spec.inverse_fraction, "Fraction of enzymes in inverse pairs");
  gen->add_option("--heldout-fraction", spec.heldout_fraction,
                  "Share of pattern-completing triples held out");
  gen->add_option("--seed", spec.seed, "Random seed");
  gen->add_option("--out", synth_out, "Output directory")->required();

  // build-graph
  std::string data, incomplete, out;
  bool homogeneous_graph = false;
  auto* build = app.add_subcommand("build-graph", "Build the hypergraph and dump H(2)");
  build->add_option("--data", data, "Equation file (TSV or JSON)")->required();
  build->add_option("--incomplete-data", incomplete, "Extra incomplete equations");
  build->add_flag("--homogeneous", homogeneous_graph, "Single sharing edge type");
  build->add_option("--out", out, "Edge list TSV (default stdout)");

  // train
  CommonFlags flags;
  std::string holdout, ckpt_out, train_data, train_incomplete;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--config", flags.config, "Flat key = value config file");
  train->add_option("--data", train_data, "Equation file (TSV or JSON)")->required();
  train->add_option("--incomplete-data", train_incomplete, "Extra incomplete equations");
  train->add_option("--holdout", holdout, "Equations forced into the test split");
  train->add_option("--out", ckpt_out, "Checkpoint path")->required();
  train->add_option("--seed", flags.seed, "Random seed");
  train->add_option("--threads", flags.threads, "Evaluation threads");
  train->add_flag("--homogeneous", flags.homogeneous, "Collapse sharing edge types");
  train->add_option("--decoder", flags.decoder, "pairre, transe or mlp")
      ->check(CLI::IsMember({"pairre", "transe", "mlp"}));
  train->add_option("--encoder", flags.encoder, "hyper or meanpool")
      ->check(CLI::IsMember({"hyper", "meanpool"}));
  train->add_option("--epochs", flags.epochs, "Override max_epochs");

  // evaluate
  std::string ckpt, split_name = "test", per_triple, report_format = "table";
  std::optional<std::size_t> eval_threads;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Filtered relation-prediction metrics");
  evaluate_cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
  evaluate_cmd->add_option("--split", split_name, "train, valid or test")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  evaluate_cmd->add_option("--per-triple", per_triple, "Write per-triple ranks (TSV)");
  evaluate_cmd->add_option("--format", report_format, "table or kv")
      ->check(CLI::IsMember({"table", "kv"}));
  evaluate_cmd->add_option("--threads", eval_threads, "Embedding threads");

  // predict
  std::string educts, products;
  std::size_t topk = 10;
  auto* predict = app.add_subcommand("predict", "Rank enzymes for one equation");
  predict->add_option("--ckpt", ckpt, "Checkpoint")->required();
  predict->add_option("--educts", educts, "Comma-separated educts")->required();
  predict->add_option("--products", products, "Comma-separated products")->required();
  predict->add_option("--topk", topk, "Rows to print (0: all)");

  // fuse
  std::string kb_path, kb_incomplete, ml_path, weights_text = "0.4,0.1,0.5", aggregation = "max";
  std::vector<std::string> substrates;
  bool provenance = false;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fused expert ranking for substrates");
  fuse_cmd->add_option("--kb", kb_path, "Knowledge base equations")->required();
  fuse_cmd->add_option("--incomplete-data", kb_incomplete, "Extra incomplete equations");
  fuse_cmd->add_option("--ckpt", ckpt, "Checkpoint for the hypergraph expert");
  fuse_cmd->add_option("--ml-logits", ml_path, "Expert-logit TSV (substrate, enzyme, logit)");
  fuse_cmd->add_option("--weights", weights_text, "w1,w2,w3 for the KB, hypergraph and ML experts");
  fuse_cmd->add_option("--substrate", substrates, "Substrate name(s)")->required()->delimiter(',');
  fuse_cmd->add_option("--topk", topk, "Rows per substrate (0: all)");
  fuse_cmd->add_option("--aggregation", aggregation, "max, mean or sum")
      ->check(CLI::IsMember({"max", "mean", "sum"}));
  fuse_cmd->add_flag("--provenance", provenance, "Add per-expert logit columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen) {
      SyntheticKG s = generate_synthetic(spec);
      fs::create_directories(synth_out);
      std::ofstream complete(fs::path(synth_out) / "complete.tsv");
      std::ofstream inc(fs::path(synth_out) / "incomplete.tsv");
      std::ofstream held(fs::path(synth_out) / "heldout.tsv");
      write_equation_tsv(complete, s.kg, s.kg.complete());
      write_equation_tsv(inc, s.kg, s.kg.incomplete());
      for (std::size_t i : s.heldout) held << s.kg.format(s.kg.complete()[i]) << "\n";
      if (!complete || !inc || !held) throw Error("failed writing to " + synth_out);
      std::cout << "complete\t" << s.kg.complete().size() << "\nincomplete\t"
                << s.kg.incomplete().size() << "\nheldout\t" << s.heldout.size()
                << "\nsymmetric\t" << s.symmetric.size() << "\ninverse_pairs\t"
                << s.inverse_pairs.size() << "\n";
    } else if (*build) {
      EquationKG kg = load_kg(data, incomplete);
      Hypergraph g = Hypergraph::build(kg, homogeneous_graph);
      std::cerr << "compounds " << kg.compounds().size() << ", enzymes " << kg.enzymes().size()
                << ", complete " << kg.complete().size() << ", incomplete "
                << kg.incomplete().size() << ", hyperedges " << g.num_hyperedges()
                << ", typed edges " << g.num_typed_edges() << "\n";
      if (out.empty()) {
        g.dump(std::cout);
      } else {
        std::ofstream f(out);
        if (!f) throw Error("cannot write " + out);
        g.dump(f);
      }
    } else if (*train) {
      TrainConfig config = resolve_config(flags);
      EquationKG kg = load_kg(train_data, train_incomplete);
      std::vector<std::size_t> forced;
      if (!holdout.empty()) forced = match_holdout(kg, holdout);
      SplitSpec ss;
      ss.seed = config.seed;
      Split sp = split(kg, ss, forced);
      Model model = make_model(std::move(kg), std::move(sp), config);
      Trainer trainer(model);
      trainer.fit([](const EpochRecord& r) {
        std::cerr << "epoch " << r.epoch << " loss " << r.loss;
        if (r.valid_mrr) std::cerr << " valid_mrr " << *r.valid_mrr;
        std::cerr << "\n";
      });
      save_checkpoint(ckpt_out, model, trainer.state());
      const RankingReport report =
          evaluate_model(model, model.split.test, TrueTripleSet::from(model.kg), config.threads);
      write_report_table(std::cout, report, "test");
    } else if (*evaluate_cmd) {
      Checkpoint ck = load_checkpoint(ckpt);
      const auto& part = split_part(ck.model, split_name);
      const std::size_t threads = eval_threads.value_or(ck.model.config.threads);
      const RankingReport report =
          evaluate_model(ck.model, part, TrueTripleSet::from(ck.model.kg), threads);
      if (report_format == "kv") {
        write_report_kv(std::cout, report);
      } else {
        write_report_table(std::cout, report, split_name);
      }
      if (!per_triple.empty()) {
        std::ofstream f(per_triple);
        if (!f) throw Error("cannot write " + per_triple);
        write_per_triple(f, ck.model.kg, part, report);
      }
    } else if (*predict) {
      Checkpoint ck = load_checkpoint(ckpt);
      Model& m = ck.model;
      std::vector<std::string> unknown;
      const auto s_ids = compound_ids(m, educts, unknown);
      const auto p_ids = compound_ids(m, products, unknown);
      for (const auto& u : unknown) std::cerr << "warning: unknown compound " << u << "\n";
      if (s_ids.empty() || p_ids.empty()) {
        throw OutOfVocabularyError("no known compound on the " +
                                   std::string(s_ids.empty() ? "educt" : "product") + " side");
      }
      const auto s = embed_compound_set(m, s_ids, Role::kEduct);
      const auto p = embed_compound_set(m, p_ids, Role::kProduct);
      const auto d = enzyme_distances(m, s.data(), p.data());
      std::vector<std::size_t> order(d.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] < d[b]; });
      const double best = d[order.front()];
      double norm = 0.0;
      for (double x : d) norm += std::exp(best - x);
      const std::string query = educts + ">>" + products;
      std::cout << "query\trank\tenzyme\tdistance\tprobability\n";
      const std::size_t rows = topk == 0 ? order.size() : std::min(topk, order.size());
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t e = order[r];
        std::cout << query << '\t' << r + 1 << '\t'
                  << m.kg.enzymes().name(EnzymeId(static_cast<std::uint32_t>(e))) << '\t' << d[e]
                  << '\t' << std::exp(best - d[e]) / norm << '\n';
      }
    } else if (*fuse_cmd) {
      const FusionWeights weights = parse_weights(weights_text);
      EquationKG kb = load_kg(kb_path, kb_incomplete);
      std::optional<Checkpoint> ck;
      if (!ckpt.empty()) ck = load_checkpoint(ckpt);
      std::optional<MlLogitTable> table;
      if (!ml_path.empty()) {
        table = read_ml_logits_file(ml_path);
        for (const auto& w : table->warnings) std::cerr << "warning: " << w << "\n";
      }
      std::cout << "substrate\trank\tenzyme\tprobability";
      if (provenance) std::cout << "\tkb\thyperenz\tml";
      std::cout << "\n";
      for (const std::string& sub : substrates) {
        SubstratePrediction pred =
            predict_substrate(sub, kb, ck ? &ck->model : nullptr, table ? &*table : nullptr,
                              weights, topk, parse_aggregation(aggregation));
        for (std::size_t r = 0; r < pred.ranking.size(); ++r) {
          const RankedEnzyme& e = pred.ranking[r];
          std::cout << sub << '\t' << r + 1 << '\t' << pred.catalog.name(e.enzyme) << '\t'
                    << e.probability;
          if (provenance) {
            for (ExpertId id : {ExpertId::kKB, ExpertId::kHyperEnz, ExpertId::kML}) {
              std::cout << '\t';
              for (const auto& o : pred.outputs) {
                if (o.expert != id) continue;
                if (auto it = o.logits.find(e.enzyme); it != o.logits.end()) {
                  std::cout << it->second;
                }
              }
            }
          }
          std::cout << '\n';
        }
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
