// concierge: fit, query, evaluate and serve document recommendation models.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "concierge/corpus.hpp"
#include "concierge/errors.hpp"
#include "concierge/evaluate.hpp"
#include "concierge/http.hpp"
#include "concierge/pipeline.hpp"
#include "concierge/recommend.hpp"
#include "concierge/service.hpp"

using namespace concierge;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("concierge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
  const char* env = std::getenv("CONCIERGE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write output file '" + path + "'");
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <class T>
std::vector<T> parse_numbers(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      T v;
      if constexpr (std::is_integral_v<T>) v = static_cast<T>(std::stoll(item, &used));
      else v = static_cast<T>(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw InvalidArgument(std::string("invalid ") + what + " value '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + " list is empty");
  return out;
}

CorpusFormat parse_format(const std::string& s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "csv") return CorpusFormat::csv;
  throw InvalidArgument("unknown corpus format '" + s + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

// Options shared by the fit and evaluate commands.
struct FitOptions {
  std::string config;
  std::string scheme = "tfidf";
  int components = 150;
  int keyword_components = 30;
  std::size_t min_count = 3;
  double max_df = 0.8;
  std::uint64_t seed = 0;
  std::string word_vectors;
  std::string metric = "euclidean";
  int leaf_size = 40;
  double alpha = 1.8;
  double beta = 0.0;

  void add(CLI::App* app, bool with_scheme = true) {
    app->add_option("--config", config, "Pipeline config JSON; flags given explicitly override it");
    if (with_scheme) app->add_option("--scheme", scheme, "tf | tfidf | logentropy | wordvec | keywords");
    app->add_option("--components", components, "LSA components")->check(CLI::PositiveNumber);
    app->add_option("--keyword-components", keyword_components, "LSA components for the keyword scheme")
        ->check(CLI::PositiveNumber);
    app->add_option("--min-count", min_count, "Minimum document frequency of a term");
    app->add_option("--max-df", max_df, "Maximum document-frequency ratio of a term")->check(CLI::Range(0.0, 1.0));
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--word-vectors", word_vectors, "Word-vector text file (wordvec scheme)");
    app->add_option("--metric", metric, "euclidean | cosine");
    app->add_option("--leaf-size", leaf_size, "Ball-tree leaf size")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "Rocchio alpha")->check(CLI::NonNegativeNumber);
    app->add_option("--beta", beta, "Rocchio beta")->check(CLI::NonNegativeNumber);
  }

  PipelineConfig build(const CLI::App* app) const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : PipelineConfig::from_json(read_json_file(config));
    auto given = [&](const char* name) { return config.empty() || app->count(name) > 0; };
    if (given("--scheme") && app->get_option_no_throw("--scheme")) c.scheme = parse_scheme(scheme);
    if (given("--components")) c.components = components;
    if (given("--keyword-components")) c.keyword_components = keyword_components;
    if (given("--min-count")) c.min_count = min_count;
    if (given("--max-df")) c.max_df_ratio = max_df;
    if (given("--seed")) c.seed = seed;
    if (given("--word-vectors")) c.word_vectors = word_vectors;
    if (given("--metric")) c.metric = parse_metric(metric);
    if (given("--leaf-size")) c.leaf_size = leaf_size;
    if (given("--alpha")) c.rocchio.alpha = alpha;
    if (given("--beta")) c.rocchio.beta = beta;
    c.validate();
    return c;
  }
};

// Corpus source for evaluation: a file, or a synthetic config.
struct CorpusSource {
  std::string path;
  std::string format = "jsonl";
  std::string synthetic;

  void add(CLI::App* app) {
    app->add_option("--corpus", path, "Corpus file");
    app->add_option("--format", format, "Corpus format: jsonl | csv");
    app->add_option("--synthetic", synthetic, "Synthetic corpus config JSON (instead of --corpus)");
  }

  Corpus load() const {
    if (!path.empty() && !synthetic.empty()) throw InvalidArgument("give either --corpus or --synthetic, not both");
    if (!synthetic.empty()) return generate_synthetic_corpus(synthetic_config_from_json(read_json_file(synthetic)));
    if (path.empty()) throw InvalidArgument("--corpus or --synthetic is required");
    auto c = load_corpus(path, parse_format(format));
    spdlog::info("loaded {} documents from {}", c.size(), path);
    return c;
  }
};

int cmd_fit(const CLI::App* app, const CorpusSource& src, const FitOptions& fo, const std::string& out) {
  const auto config = fo.build(app);
  auto corpus = src.load();
  if (corpus.empty()) throw FitError("fit: corpus is empty");
  const auto model = fit(std::move(corpus), config);
  save_model(model, out);
  std::cout << "documents " << model.corpus->size() << "\n"
            << "vocabulary " << model.vocabulary.size() << "\n"
            << "scheme " << to_string(model.config.scheme) << "\n"
            << "dimensions " << model.embedding.dim() << "\n"
            << "model " << out << "\n";
  return 0;
}

struct RecommendArgs {
  std::string model;
  std::vector<std::string> like, dislike;
  std::size_t k = 10;
  std::optional<double> alpha, beta;
  std::string format = "json";
  std::string out;
  std::string corpus;
  bool force = false;
};

int cmd_recommend(const RecommendArgs& a) {
  const auto model = load_model(a.model);
  if (!a.corpus.empty()) {
    const auto fp = corpus_fingerprint(load_corpus(a.corpus));
    if (fp != model.fingerprint && !a.force)
      throw LoadError("corpus '" + a.corpus + "' does not match the model fingerprint (use --force to ignore)");
  }
  VoteSet votes;
  for (const auto& id : a.like) votes.vote(id, Relevance::relevant);
  for (const auto& id : a.dislike) {
    if (votes.relevant().count(id)) throw InvalidArgument("document '" + id + "' is both liked and disliked");
    votes.vote(id, Relevance::nonrelevant);
  }
  for (const auto* set : {&votes.relevant(), &votes.nonrelevant()})
    for (const auto& id : *set)
      if (!model.corpus->find(id)) throw QueryError("unknown document id '" + id + "'");
  RocchioParams p = model.config.rocchio;
  if (a.alpha) p.alpha = *a.alpha;
  if (a.beta) p.beta = *a.beta;
  const auto list = model.recommend(votes, p, a.k);
  std::string text;
  if (a.format == "tsv") {
    text = "id\tdistance\ttitle\n";
    for (const auto& r : list.items)
      text += r.id + '\t' + detail::num(r.distance) + '\t' + (*model.corpus)[r.ordinal].title + '\n';
  } else if (a.format == "json") {
    auto j = nlohmann::ordered_json::array();
    for (const auto& r : list.items)
      j.push_back({{"id", r.id}, {"distance", r.distance}, {"title", (*model.corpus)[r.ordinal].title}});
    text = j.dump(2) + '\n';
  } else {
    throw InvalidArgument("unknown output format '" + a.format + "' (json or tsv)");
  }
  write_output(a.out, text);
  return 0;
}

struct EvalArgs {
  CorpusSource source;
  FitOptions fit;
  std::size_t runs = 1000;
  std::size_t votes = 10;
  std::size_t k = 10;
  std::string out;
  std::string format = "csv";
  std::string pairs_out;
  std::string grid = "2,10,50,150";
  std::string alphas = "0,0.2,0.4,0.6,0.8,1,1.2,1.4,1.6,1.8,2";
  std::string betas = "0,0.2,0.4,0.6,0.8,1,1.2,1.4,1.6,1.8,2";
  int dislike_distance = 1;
  std::string schemes = "random,keywords,tfidf";
  std::size_t n_pairs = 10000;
};

SimulationConfig simulation(const EvalArgs& a, const PipelineConfig& pc) {
  SimulationConfig s;
  s.n_runs = a.runs;
  s.n_votes = a.votes;
  s.k = a.k;
  s.rocchio = pc.rocchio;
  s.metric = pc.metric;
  s.leaf_size = pc.leaf_size;
  s.seed = pc.seed;
  s.validate();
  return s;
}

void check_format(const std::string& f) {
  if (f != "csv" && f != "json") throw InvalidArgument("unknown output format '" + f + "' (csv or json)");
}

int cmd_evaluate(const std::string& which, const CLI::App* app, const EvalArgs& a) {
  check_format(a.format);
  const auto pc = a.fit.build(app);
  const auto sim = simulation(a, pc);
  const auto corpus = a.source.load();
  if (!corpus.fully_labeled()) throw StatsError("evaluation needs a fully labeled corpus");
  const bool csv = a.format == "csv";

  if (which == "sweep-components") {
    const auto cells = sweep_components(corpus, parse_numbers<int>(a.grid, "component"), sim, pc);
    write_output(a.out, csv ? components_csv(cells) : components_json(cells).dump(2) + '\n');
  } else if (which == "sweep-rocchio") {
    const auto f = fit_embedding(corpus, pc);
    const auto cells = sweep_rocchio(f.embedding, corpus, parse_numbers<double>(a.alphas, "alpha"),
                                     parse_numbers<double>(a.betas, "beta"), a.dislike_distance, sim);
    write_output(a.out, csv ? rocchio_csv(cells) : rocchio_json(cells).dump(2) + '\n');
  } else if (which == "compare" || which == "baseline-random") {
    std::vector<SchemeSpec> specs;
    if (which == "baseline-random") {
      const auto curve = simulate_vote_sequence(random_suggester(corpus.size(), sim), corpus, sim);
      write_output(a.out, csv ? curves_csv({"random"}, {curve})
                              : nlohmann::ordered_json{{"scheme", "random"}, {"mean_distance", curve.mean},
                                                       {"stderr", curve.stderr_}, {"n_runs", curve.n_runs}}
                                        .dump(2) + '\n');
      return 0;
    }
    for (const auto& name : split_list(a.schemes)) {
      if (name != "random") parse_scheme(name);
      specs.push_back({name, pc});
    }
    const auto cmp = compare_schemes(corpus, specs, sim);
    write_output(a.out, csv ? curves_csv(cmp.schemes, cmp.curves) : comparison_json(cmp).dump(2) + '\n');
    if (!a.pairs_out.empty()) write_output(a.pairs_out, pairs_csv(cmp.pairs));
  } else if (which == "correlate") {
    std::string table = "scheme,spearman,pearson,n_pairs\n";
    auto j = nlohmann::ordered_json::array();
    std::string pairs;
    for (const auto& name : split_list(a.schemes)) {
      DocEmbedding emb;
      if (name == "onehot") {
        emb = topic_path_embedding(corpus);
      } else {
        auto fc = pc;
        fc.scheme = parse_scheme(name);
        emb = fit_embedding(corpus, fc).embedding;
      }
      const auto r = distance_correlation(emb, corpus, a.n_pairs, pc.seed);
      table += name + ',' + detail::num(r.spearman) + ',' + detail::num(r.pearson) + ',' + std::to_string(r.n_pairs) + '\n';
      j.push_back(correlation_json(r, name));
      if (!a.pairs_out.empty()) {
        auto rows = correlation_csv(r, corpus);
        if (!pairs.empty()) rows.erase(0, rows.find('\n') + 1);
        std::string prefixed;
        std::istringstream lines(rows);
        std::string line;
        bool header = pairs.empty();
        while (std::getline(lines, line)) {
          prefixed += (header ? std::string("scheme") : name) + ',' + line + '\n';
          header = false;
        }
        pairs += prefixed;
      }
    }
    write_output(a.out, csv ? table : j.dump(2) + '\n');
    if (!a.pairs_out.empty()) write_output(a.pairs_out, pairs);
  }
  return 0;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct ServeArgs {
  std::string model;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin;
  std::string snapshot;
  int threads = 8;
};

int cmd_serve(const ServeArgs& a) {
  auto model = std::make_shared<const FittedModel>(load_model(a.model));
  ServiceOptions opt;
  opt.cors_origin = a.cors_origin;
  Service service(model, opt);
  if (!a.snapshot.empty() && std::ifstream(a.snapshot)) service.load_snapshot(a.snapshot);
  httplib::Server server;
  server.new_task_queue = [n = a.threads] { return new httplib::ThreadPool(static_cast<std::size_t>(n)); };
  register_routes(server, service);
  if (!server.bind_to_port(a.host, a.port)) {
    std::cerr << "error: cannot bind " << a.host << ':' << a.port << '\n';
    return 2;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("serving {} documents on http://{}:{}", model->corpus->size(), a.host, a.port);
  std::cout << "listening on http://" << a.host << ':' << a.port << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  if (!a.snapshot.empty()) service.save_snapshot(a.snapshot);
  return 0;
}

int cmd_generate(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
  SyntheticConfig c = config.empty() ? SyntheticConfig{} : synthetic_config_from_json(read_json_file(config));
  if (seed) c.seed = *seed;
  const auto corpus = generate_synthetic_corpus(c);
  write_output(out, to_jsonl(corpus));
  spdlog::info("generated {} documents", corpus.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Content-based document recommender: fit, recommend, evaluate, serve"};
  app.require_subcommand(1);

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model on a corpus and write the model file");
  CorpusSource fit_src;
  FitOptions fit_opts;
  std::string fit_out;
  fit_src.add(fit_cmd);
  fit_opts.add(fit_cmd);
  fit_cmd->add_option("--out", fit_out, "Model output path")->required();

  auto* rec_cmd = app.add_subcommand("recommend", "Recommend documents from liked/disliked ids");
  RecommendArgs rec;
  rec_cmd->add_option("--model", rec.model, "Model file")->required();
  rec_cmd->add_option("--like", rec.like, "Relevant document id (repeatable)")->required();
  rec_cmd->add_option("--dislike", rec.dislike, "Non-relevant document id (repeatable)");
  rec_cmd->add_option("-k,--k", rec.k, "Number of suggestions")->check(CLI::PositiveNumber);
  rec_cmd->add_option("--alpha", rec.alpha, "Override Rocchio alpha")->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--beta", rec.beta, "Override Rocchio beta")->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--output-format", rec.format, "json | tsv");
  rec_cmd->add_option("--out", rec.out, "Output file (default stdout)");
  rec_cmd->add_option("--corpus", rec.corpus, "Check this corpus against the model fingerprint");
  rec_cmd->add_flag("--force", rec.force, "Ignore a fingerprint mismatch");

  auto* eval_cmd = app.add_subcommand("evaluate", "Run an evaluation protocol");
  eval_cmd->require_subcommand(1);
  EvalArgs ev;
  std::vector<CLI::App*> eval_subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"sweep-components", "Single-vote distance per LSA component count"},
           {"sweep-rocchio", "Like one, dislike one: distance per (alpha, beta)"},
           {"compare", "Vote curves and paired t tests across schemes"},
           {"correlate", "Rank correlation of model and topic distances"},
           {"baseline-random", "Vote curve of random suggestions"}}) {
    auto* sub = eval_cmd->add_subcommand(name, help);
    ev.source.add(sub);
    ev.fit.add(sub, name != "compare" && name != "correlate");
    sub->add_option("--runs", ev.runs, "Simulated users")->check(CLI::PositiveNumber);
    sub->add_option("--votes", ev.votes, "Relevant votes per user")->check(CLI::PositiveNumber);
    sub->add_option("-k,--k", ev.k, "Suggestions per query")->check(CLI::PositiveNumber);
    sub->add_option("--out", ev.out, "Output file (default stdout)");
    sub->add_option("--output-format", ev.format, "csv | json");
    eval_subs.push_back(sub);
  }
  eval_subs[0]->add_option("--grid", ev.grid, "Comma-separated component counts");
  eval_subs[1]->add_option("--alphas", ev.alphas, "Comma-separated alpha values");
  eval_subs[1]->add_option("--betas", ev.betas, "Comma-separated beta values");
  eval_subs[1]->add_option("--dislike-distance", ev.dislike_distance, "Topic distance of the disliked poster")
      ->check(CLI::Range(1, 3));
  eval_subs[2]->add_option("--schemes", ev.schemes, "Comma-separated schemes (random allowed)");
  eval_subs[2]->add_option("--pairs-out", ev.pairs_out, "Paired t table CSV");
  eval_subs[3]->add_option("--schemes", ev.schemes, "Comma-separated schemes (onehot allowed)");
  eval_subs[3]->add_option("--pairs", ev.n_pairs, "Sampled document pairs")->check(CLI::Range(2, 100000000));
  eval_subs[3]->add_option("--pairs-out", ev.pairs_out, "Per-pair CSV with z-scored model distances");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API for a model");
  ServeArgs sv;
  serve_cmd->add_option("--model", sv.model, "Model file")->required();
  serve_cmd->add_option("--host", sv.host, "Bind address");
  serve_cmd->add_option("--port", sv.port, "Port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--cors-origin", sv.cors_origin, "Allowed cross-origin (e.g. http://localhost:5173)");
  serve_cmd->add_option("--snapshot", sv.snapshot, "Session snapshot file, restored at start and written on exit");
  serve_cmd->add_option("--threads", sv.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("generate", "Write a planted-topic synthetic corpus as JSONL");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen_cmd->add_option("--config", gen_config, "Synthetic config JSON");
  gen_cmd->add_option("--seed", gen_seed, "Override the config seed");
  gen_cmd->add_option("--out", gen_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_cmd, fit_src, fit_opts, fit_out);
    if (rec_cmd->parsed()) return cmd_recommend(rec);
    if (serve_cmd->parsed()) return cmd_serve(sv);
    if (gen_cmd->parsed()) return cmd_generate(gen_config, gen_seed, gen_out);
    for (auto* sub : eval_subs)
      if (sub->parsed()) return cmd_evaluate(sub->get_name(), sub, ev);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::usage ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
