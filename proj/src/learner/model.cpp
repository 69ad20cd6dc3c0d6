#include "ptmaml/learner/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ptmaml/sql/parser.hpp"

namespace ptmaml::learner {

using ad::Graph;
using ad::NodeId;
using sql::DecodeTag;
using sql::Terminal;

namespace {

std::size_t gates(CellKind k) { return k == CellKind::Gru ? 3 : 4; }

std::string enc_name(int layer, bool fwd, const char* part) {
  return "enc.l" + std::to_string(layer) + (fwd ? ".fwd." : ".bwd.") + part;
}

std::string dec_name(int layer, const char* part) { return "dec.l" + std::to_string(layer) + "." + part; }

struct Cell {
  NodeId wx, wh, b;
};

struct State {
  NodeId h, c;
  bool zero = true;
};

} // namespace

Seq2Sql::Seq2Sql(LearnerConfig cfg, Vocab vocab) : cfg_(cfg), vocab_(std::move(vocab)) { cfg_.validate(); }

ad::ParamSet Seq2Sql::init_params(std::uint64_t seed) const {
  const std::size_t E = static_cast<std::size_t>(cfg_.embed_dim);
  const std::size_t H = static_cast<std::size_t>(cfg_.hidden_dim);
  const std::size_t G = gates(cfg_.cell) * H;
  ad::ParamSet p;
  p.add("embed.word", ad::Tensor(ad::Shape{vocab_.size(), E}));
  p.add("embed.terminal", ad::Tensor(ad::Shape{sql::kTerminalCount, E}));
  for (int l = 0; l < cfg_.encoder_layers; ++l) {
    std::size_t in = l == 0 ? E : 2 * H;
    for (bool fwd : {true, false}) {
      p.add(enc_name(l, fwd, "Wx"), ad::Tensor(ad::Shape{G, in}));
      p.add(enc_name(l, fwd, "Wh"), ad::Tensor(ad::Shape{G, H}));
      p.add(enc_name(l, fwd, "b"), ad::Tensor(ad::Shape{G}));
    }
  }
  p.add("dec.init.W", ad::Tensor(ad::Shape{H, 2 * H}));
  p.add("dec.init.b", ad::Tensor(ad::Shape{H}));
  for (int l = 0; l < cfg_.decoder_layers; ++l) {
    std::size_t in = l == 0 ? E : H;
    p.add(dec_name(l, "Wx"), ad::Tensor(ad::Shape{G, in}));
    p.add(dec_name(l, "Wh"), ad::Tensor(ad::Shape{G, H}));
    p.add(dec_name(l, "b"), ad::Tensor(ad::Shape{G}));
  }
  p.add("attn.W", ad::Tensor(ad::Shape{H, 2 * H}));
  p.add("out.W", ad::Tensor(ad::Shape{H, 3 * H}));
  p.add("out.b", ad::Tensor(ad::Shape{H}));
  p.add("vocab.W", ad::Tensor(ad::Shape{sql::kTerminalCount, H}));
  p.add("vocab.b", ad::Tensor(ad::Shape{sql::kTerminalCount}));

  const double r = 1.0 / std::sqrt(static_cast<double>(H));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-r, r);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (double& v : p[i].values()) {
      do v = u(rng);
      while (v == -r);
    }
  }
  return p;
}

InputLayout Seq2Sql::layout(const data::Example& ex) const {
  InputLayout in;
  in.tokens.push_back(ex.table_id);
  in.ids.push_back(vocab_.id(Vocab::kTableSlot));
  in.column_at.emplace_back();
  std::vector<std::string> collapsed;
  for (std::size_t c = 0; c < ex.header.size(); ++c) {
    collapsed.push_back(collapsed_header(ex.header[c]));
    in.tokens.push_back(collapsed.back());
    in.ids.push_back(vocab_.id(collapsed.back()));
    in.column_at.emplace_back(c);
  }
  in.tokens.emplace_back(Vocab::kSeparator);
  in.ids.push_back(vocab_.id(Vocab::kSeparator));
  in.column_at.emplace_back();
  in.question_begin = in.tokens.size();
  for (const auto& t : ex.tokens) {
    in.tokens.push_back(t);
    in.ids.push_back(vocab_.id(t));
    auto it = std::find(collapsed.begin(), collapsed.end(), t);
    in.column_at.push_back(it == collapsed.end() ? std::nullopt
                                                 : std::optional<std::size_t>(static_cast<std::size_t>(it - collapsed.begin())));
  }
  return in;
}

Candidates legal_candidates(const sql::GrammarState& state, const InputLayout& in, std::size_t budget) {
  sql::AllowedNext a = state.allowed();
  Candidates c;
  c.terminals = a.terminals;
  bool column = a.column;
  // A new condition needs column, comparator, value and <END>.
  if (state.slot() == sql::Slot::ConditionOrEnd && budget < 4) column = false;
  if (column) {
    c.copy_tag = DecodeTag::Column;
    for (std::size_t p = 0; p < in.column_at.size(); ++p) {
      if (in.column_at[p]) c.positions.push_back(p);
    }
  } else if (a.table) {
    c.copy_tag = DecodeTag::Column;
    c.positions.push_back(0);
  } else if (a.constant) {
    c.copy_tag = DecodeTag::Constant;
    for (std::size_t p = in.question_begin; p < in.tokens.size(); ++p) c.positions.push_back(p);
  }
  return c;
}

std::vector<std::size_t> gold_candidates(const Candidates& cands, const InputLayout& in, const sql::DecodeStep& step,
                                         int example_id) {
  std::vector<std::size_t> out;
  const std::size_t base = cands.terminals.size();
  if (step.tag == DecodeTag::Operator) {
    for (std::size_t i = 0; i < cands.terminals.size(); ++i) {
      if (cands.terminals[i] == step.terminal) out.push_back(i);
    }
    if (out.empty()) {
      throw TargetError("example " + std::to_string(example_id) + ": terminal " +
                        std::string(sql::terminal_text(step.terminal)) + " is not a legal move");
    }
    return out;
  }
  const bool table_slot = cands.positions.size() == 1 && cands.positions[0] == 0;
  const std::string collapsed = collapsed_header(step.text);
  for (std::size_t i = 0; i < cands.positions.size(); ++i) {
    std::size_t p = cands.positions[i];
    bool hit = false;
    if (table_slot) {
      hit = in.tokens[p] == step.text;
    } else if (cands.copy_tag == DecodeTag::Column) {
      hit = in.column_at[p] && in.tokens[p] == collapsed;
    } else {
      hit = in.tokens[p] == step.text;
    }
    if (hit) out.push_back(base + i);
  }
  if (out.empty()) {
    throw TargetError("example " + std::to_string(example_id) + ": copy target '" + step.text +
                      "' has no legal position");
  }
  return out;
}

/// One forward pass: encoder plus a step-at-a-time decoder.
struct Seq2Sql::Run {
  const Seq2Sql& m;
  Graph& g;
  InputLayout in;
  std::size_t H;
  NodeId word, term;
  std::vector<Cell> dec;
  NodeId henc, attn_w, out_w, out_b, vocab_w, vocab_b;
  std::vector<State> states;

  Run(const Seq2Sql& model, Graph& graph, const data::Example& ex)
      : m(model), g(graph), in(model.layout(ex)), H(static_cast<std::size_t>(model.cfg_.hidden_dim)) {
    word = g.parameter("embed.word");
    term = g.parameter("embed.terminal");
    attn_w = g.parameter("attn.W");
    out_w = g.parameter("out.W");
    out_b = g.parameter("out.b");
    vocab_w = g.parameter("vocab.W");
    vocab_b = g.parameter("vocab.b");
    encode();
  }

  State step(const Cell& cell, NodeId x, const State& s) {
    NodeId gx = g.add(g.matmul(cell.wx, x), cell.b);
    auto part = [&](NodeId v, std::size_t k) { return g.slice(v, k * H, H); };
    State out;
    out.zero = false;
    if (m.cfg_.cell == CellKind::Gru) {
      if (s.zero) {
        NodeId z = g.sigmoid(part(gx, 0));
        NodeId n = g.tanh(part(gx, 2));
        out.h = g.sub(n, g.mul(z, n));
      } else {
        NodeId gh = g.matmul(cell.wh, s.h);
        NodeId z = g.sigmoid(g.add(part(gx, 0), part(gh, 0)));
        NodeId r = g.sigmoid(g.add(part(gx, 1), part(gh, 1)));
        NodeId n = g.tanh(g.add(part(gx, 2), g.mul(r, part(gh, 2))));
        out.h = g.add(n, g.mul(z, g.sub(s.h, n)));
      }
      return out;
    }
    NodeId pre = s.zero ? gx : g.add(gx, g.matmul(cell.wh, s.h));
    NodeId i = g.sigmoid(part(pre, 0));
    NodeId f = g.sigmoid(part(pre, 1));
    NodeId c_in = g.tanh(part(pre, 2));
    NodeId o = g.sigmoid(part(pre, 3));
    out.c = s.zero ? g.mul(i, c_in) : g.add(g.mul(f, s.c), g.mul(i, c_in));
    out.h = g.mul(o, g.tanh(out.c));
    return out;
  }

  void encode() {
    const std::size_t L = in.ids.size();
    std::vector<NodeId> xs;
    for (std::size_t id : in.ids) xs.push_back(g.embedding(word, id));
    std::vector<NodeId> fwd(L), bwd(L);
    for (int l = 0; l < m.cfg_.encoder_layers; ++l) {
      Cell cf{g.parameter(enc_name(l, true, "Wx")), g.parameter(enc_name(l, true, "Wh")),
              g.parameter(enc_name(l, true, "b"))};
      Cell cb{g.parameter(enc_name(l, false, "Wx")), g.parameter(enc_name(l, false, "Wh")),
              g.parameter(enc_name(l, false, "b"))};
      State s;
      for (std::size_t t = 0; t < L; ++t) {
        s = step(cf, xs[t], s);
        fwd[t] = s.h;
      }
      s = State{};
      for (std::size_t t = L; t-- > 0;) {
        s = step(cb, xs[t], s);
        bwd[t] = s.h;
      }
      for (std::size_t t = 0; t < L; ++t) {
        NodeId pair[2] = {fwd[t], bwd[t]};
        xs[t] = g.concat(pair);
      }
    }
    henc = g.stack(xs);

    NodeId ends[2] = {fwd[L - 1], bwd[0]};
    NodeId s0 = g.tanh(g.add(g.matmul(g.parameter("dec.init.W"), g.concat(ends)), g.parameter("dec.init.b")));
    for (int l = 0; l < m.cfg_.decoder_layers; ++l) {
      dec.push_back({g.parameter(dec_name(l, "Wx")), g.parameter(dec_name(l, "Wh")), g.parameter(dec_name(l, "b"))});
      State s;
      s.h = s0;
      s.zero = false;
      if (m.cfg_.cell == CellKind::Lstm) s.c = g.scale(s0, 0.0);
      states.push_back(s);
    }
  }

  NodeId terminal_input(Terminal t) { return g.embedding(term, static_cast<std::size_t>(t)); }
  NodeId token_input(std::size_t position) { return g.embedding(word, in.ids[position]); }

  /// Feeds `x` through the decoder stack; returns the top state.
  NodeId advance(NodeId x) {
    for (std::size_t l = 0; l < dec.size(); ++l) {
      states[l] = step(dec[l], x, states[l]);
      x = states[l].h;
    }
    return x;
  }

  /// Candidate logits for the current top state `s`.
  NodeId logits(NodeId s, const Candidates& c) {
    NodeId e = g.matmul(henc, g.matmul(attn_w, s, true));
    std::vector<NodeId> parts;
    if (!c.terminals.empty()) {
      NodeId a = g.softmax(e);
      NodeId ctx = g.matmul(henc, a, true);
      NodeId sc[2] = {s, ctx};
      NodeId o = g.tanh(g.add(g.matmul(out_w, g.concat(sc)), out_b));
      NodeId tl = g.add(g.matmul(vocab_w, o), vocab_b);
      std::vector<std::size_t> idx;
      for (Terminal t : c.terminals) idx.push_back(static_cast<std::size_t>(t));
      parts.push_back(g.gather(tl, std::move(idx)));
    }
    if (!c.positions.empty()) parts.push_back(g.gather(e, c.positions));
    return parts.size() == 1 ? parts[0] : g.concat(parts);
  }

  NodeId next_input(const Candidates& c, std::size_t choice) {
    if (choice < c.terminals.size()) return terminal_input(c.terminals[choice]);
    return token_input(c.positions[choice - c.terminals.size()]);
  }
};

namespace {

NodeId step_loss(Graph& g, NodeId probs, const std::vector<std::size_t>& gold, LossKind kind) {
  NodeId mass;
  if (gold.size() == 1 || kind == LossKind::Pointer) {
    mass = g.sum(g.gather(probs, {gold.front()}));
  } else if (kind == LossKind::Max) {
    mass = g.max(g.gather(probs, gold));
  } else {
    mass = g.sum(g.gather(probs, gold));
  }
  return g.scale(g.log(mass), -1.0);
}

} // namespace

NodeId Seq2Sql::build_loss(Graph& g, const data::Example& ex, LossKind kind) const {
  Run run(*this, g, ex);
  sql::GrammarState state;
  NodeId x = run.terminal_input(Terminal::Go);
  std::optional<NodeId> total;
  for (const auto& st : sql::decode_sequence(ex.gold)) {
    NodeId s = run.advance(x);
    Candidates c = legal_candidates(state, run.in, std::numeric_limits<std::size_t>::max());
    auto gold = gold_candidates(c, run.in, st, ex.id);
    if (c.size() > 1) {
      NodeId l = step_loss(g, g.softmax(run.logits(s, c)), gold, kind);
      total = total ? g.add(*total, l) : l;
    }
    x = run.next_input(c, gold.front());
    if (st.tag == DecodeTag::Operator) {
      state.advance_terminal(st.terminal);
    } else {
      state.advance_copy(st.tag);
    }
  }
  return total ? *total : g.constant(ad::Tensor::scalar(0.0));
}

double Seq2Sql::loss(const ad::ParamSet& theta, const data::Example& ex, LossKind kind, ad::GradStore* grads) const {
  Graph g(&theta);
  NodeId l = build_loss(g, ex, kind);
  if (grads) g.backward_into(l, *grads);
  return g.scalar(l);
}

std::vector<double> Seq2Sql::step_losses(const ad::ParamSet& theta, const data::Example& ex, LossKind kind) const {
  std::vector<double> out;
  InputLayout in = layout(ex);
  auto dists = step_distributions(theta, ex);
  auto steps = sql::decode_sequence(ex.gold);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& d = dists[i];
    if (d.probs.size() <= 1) continue;
    auto gold = gold_candidates(d.candidates, in, steps[i], ex.id);
    double mass = 0.0;
    if (gold.size() == 1 || kind == LossKind::Pointer) {
      mass = d.probs[gold.front()];
    } else if (kind == LossKind::Max) {
      for (std::size_t k : gold) mass = std::max(mass, d.probs[k]);
    } else {
      for (std::size_t k : gold) mass += d.probs[k];
    }
    out.push_back(-std::log(mass));
  }
  return out;
}

std::vector<DecodeStepDist> Seq2Sql::step_distributions(const ad::ParamSet& theta, const data::Example& ex) const {
  Graph g(&theta);
  Run run(*this, g, ex);
  sql::GrammarState state;
  NodeId x = run.terminal_input(Terminal::Go);
  std::vector<DecodeStepDist> out;
  for (const auto& st : sql::decode_sequence(ex.gold)) {
    NodeId s = run.advance(x);
    DecodeStepDist d;
    d.tag = st.tag;
    d.candidates = legal_candidates(state, run.in, std::numeric_limits<std::size_t>::max());
    auto gold = gold_candidates(d.candidates, run.in, st, ex.id);
    const auto& p = g.value(g.softmax(run.logits(s, d.candidates)));
    d.probs.assign(p.values().begin(), p.values().end());
    x = run.next_input(d.candidates, gold.front());
    if (st.tag == DecodeTag::Operator) {
      state.advance_terminal(st.terminal);
    } else {
      state.advance_copy(st.tag);
    }
    out.push_back(std::move(d));
  }
  return out;
}

Prediction Seq2Sql::predict(const ad::ParamSet& theta, const data::Example& ex) const {
  Graph g(&theta);
  Run run(*this, g, ex);
  sql::GrammarState state;
  NodeId x = run.terminal_input(Terminal::Go);
  std::vector<sql::DecodeStep> steps;
  Prediction pred;
  const std::size_t limit = static_cast<std::size_t>(cfg_.max_decode_len);
  for (std::size_t t = 0; t < limit && !state.accepting(); ++t) {
    NodeId s = run.advance(x);
    Candidates c = legal_candidates(state, run.in, limit - t);
    std::size_t choice = 0;
    if (c.size() > 1) {
      auto v = g.value(run.logits(s, c)).values();
      choice = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    }
    sql::DecodeStep step;
    if (choice < c.terminals.size()) {
      step.tag = DecodeTag::Operator;
      step.terminal = c.terminals[choice];
      state.advance_terminal(step.terminal);
    } else {
      std::size_t p = c.positions[choice - c.terminals.size()];
      step.tag = c.copy_tag;
      if (state.slot() == sql::Slot::Table) {
        step.text = ex.table_id;
      } else if (c.copy_tag == DecodeTag::Column) {
        step.text = ex.header[*run.in.column_at[p]];
      } else {
        step.text = run.in.tokens[p];
      }
      state.advance_copy(step.tag);
    }
    steps.push_back(std::move(step));
    x = run.next_input(c, choice);
  }
  pred.tags = state.history();
  if (!state.accepting()) {
    pred.truncated = true;
    return pred;
  }
  pred.text = sql::render_steps(steps);
  sql::Table schema{ex.table_id, ex.header, {}};
  pred.query = sql::parse_sql(pred.text, schema);
  return pred;
}

} // namespace ptmaml::learner
