// Copyright 2026 The Sievebank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "surrogate.hpp"

#include <cmath>
#include <cstring>

#include "io_util.hpp"
#include "rng.hpp"

namespace sievebank {

namespace {

constexpr uint32_t kModelFormatVersion = 1;

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double scale) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      m(r, c) = rng.range(-scale, scale);
}

void fill_uniform(Eigen::VectorXd& v, Rng& rng, double scale) {
  for (Eigen::Index r = 0; r < v.rows(); ++r) v(r) = rng.range(-scale, scale);
}

// Column-wise stable softmax in place.
void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    double mx = z.col(c).maxCoeff();
    z.col(c) = (z.col(c).array() - mx).exp();
    z.col(c) /= z.col(c).sum();
  }
}

// Mean cross-entropy of one domain head plus, optionally, its gradient
// contributions scaled by `weight`.
double head_loss(const SurrogateModel& model, const Eigen::MatrixXd& head,
                 const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                 const std::vector<int>& y, double weight,
                 Eigen::MatrixXd* grad_head, Eigen::VectorXd* grad_bias,
                 Eigen::MatrixXd* grad_trunk) {
  Eigen::Index m = x.cols();
  if (m == 0) return 0.0;
  for (int label : y)
    if (label < 0 || label >= head.rows())
      throw InvalidArgumentError("label " + std::to_string(label) +
                                 " outside head with " +
                                 std::to_string(head.rows()) + " classes");

  Eigen::MatrixXd h = model.trunk * x;                       // F x m
  Eigen::MatrixXd p = head * h;                              // C x m
  p.colwise() += bias;
  softmax_columns(p);

  double loss = 0.0;
  for (Eigen::Index j = 0; j < m; ++j)
    loss -= std::log(std::max(p(y[j], j), 1e-300));
  loss /= static_cast<double>(m);

  if (grad_head) {
    Eigen::MatrixXd dz = p;  // (P - Y) / m
    for (Eigen::Index j = 0; j < m; ++j) dz(y[j], j) -= 1.0;
    dz *= weight / static_cast<double>(m);
    *grad_head += dz * h.transpose();
    *grad_bias += dz.rowwise().sum();
    *grad_trunk += (head.transpose() * dz) * x.transpose();
  }
  return weight * loss;
}

}  // namespace

SurrogateModel init_model(int input_dim, int feature_width, int target_classes,
                          int source_classes, uint64_t seed, double scale) {
  if (input_dim < 1 || feature_width < 1)
    throw InvalidArgumentError("model dimensions must be positive");
  if (target_classes < 2 || source_classes < 2)
    throw InvalidArgumentError("each head needs at least 2 classes");
  SurrogateModel m;
  Rng rng(mix_seed(seed, 0x50de1ull));
  m.trunk.resize(feature_width, input_dim);
  m.target_head.resize(target_classes, feature_width);
  m.target_bias.resize(target_classes);
  m.source_head.resize(source_classes, feature_width);
  m.source_bias.resize(source_classes);
  fill_uniform(m.trunk, rng, scale);
  fill_uniform(m.target_head, rng, scale);
  fill_uniform(m.target_bias, rng, scale);
  fill_uniform(m.source_head, rng, scale);
  fill_uniform(m.source_bias, rng, scale);
  return m;
}

ResolvedBatch resolve_batch(const std::vector<BatchEntry>& batch,
                            const LoopData& data) {
  size_t n_target = 0, n_source = 0;
  for (const auto& e : batch)
    (e.domain == Domain::Target ? n_target : n_source)++;

  size_t dim = 0;
  if (!data.targets->descriptors.empty())
    dim = data.targets->descriptors.front().hist.size();
  else if (!data.source->descriptors.empty())
    dim = data.source->descriptors.front().hist.size();

  ResolvedBatch out;
  out.target_x.resize(static_cast<Eigen::Index>(dim),
                      static_cast<Eigen::Index>(n_target));
  out.source_x.resize(static_cast<Eigen::Index>(dim),
                      static_cast<Eigen::Index>(n_source));
  Eigen::Index ti = 0, si = 0;
  for (const auto& e : batch) {
    const DescriptorTable& table =
        e.domain == Domain::Target ? *data.targets : *data.source;
    const std::vector<int>& labels =
        e.domain == Domain::Target ? data.target_labels : data.source_labels;
    if (e.sample_index >= table.size())
      throw InvalidArgumentError(
          std::string("schedule entry out of range: ") +
          domain_name(e.domain) + " " + std::to_string(e.sample_index));
    const Descriptor& d = table.descriptors[e.sample_index];
    if (e.domain == Domain::Target) {
      for (size_t i = 0; i < dim; ++i)
        out.target_x(static_cast<Eigen::Index>(i), ti) = d.hist[i];
      out.target_y.push_back(labels[e.sample_index]);
      ++ti;
    } else {
      for (size_t i = 0; i < dim; ++i)
        out.source_x(static_cast<Eigen::Index>(i), si) = d.hist[i];
      out.source_y.push_back(labels[e.sample_index]);
      ++si;
    }
  }
  return out;
}

double batch_loss(const SurrogateModel& model, const ResolvedBatch& batch,
                  double lambda) {
  return batch_loss_and_gradients(model, batch, lambda, nullptr);
}

double batch_loss_and_gradients(const SurrogateModel& model,
                                const ResolvedBatch& batch, double lambda,
                                SurrogateGradients* grads) {
  if (batch.target_x.cols() > 0 && batch.target_x.rows() != model.trunk.cols())
    throw InvalidArgumentError("descriptor dimension " +
                               std::to_string(batch.target_x.rows()) +
                               " does not match model input " +
                               std::to_string(model.trunk.cols()));
  if (batch.source_x.cols() > 0 && batch.source_x.rows() != model.trunk.cols())
    throw InvalidArgumentError("source descriptor dimension mismatch");

  if (grads) {
    grads->trunk = Eigen::MatrixXd::Zero(model.trunk.rows(), model.trunk.cols());
    grads->target_head =
        Eigen::MatrixXd::Zero(model.target_head.rows(), model.target_head.cols());
    grads->target_bias = Eigen::VectorXd::Zero(model.target_bias.rows());
    grads->source_head =
        Eigen::MatrixXd::Zero(model.source_head.rows(), model.source_head.cols());
    grads->source_bias = Eigen::VectorXd::Zero(model.source_bias.rows());
  }

  double loss = 0.0;
  loss += head_loss(model, model.target_head, model.target_bias,
                    batch.target_x, batch.target_y, 1.0,
                    grads ? &grads->target_head : nullptr,
                    grads ? &grads->target_bias : nullptr,
                    grads ? &grads->trunk : nullptr);
  loss += head_loss(model, model.source_head, model.source_bias,
                    batch.source_x, batch.source_y, lambda,
                    grads ? &grads->source_head : nullptr,
                    grads ? &grads->source_bias : nullptr,
                    grads ? &grads->trunk : nullptr);
  return loss;
}

TrainMetrics train(SurrogateModel& model, const BatchSchedule& schedule,
                   const LoopData& data, const SurrogateHyperparams& hp) {
  SurrogateGradients v;  // momentum velocity, zero-initialized
  v.trunk = Eigen::MatrixXd::Zero(model.trunk.rows(), model.trunk.cols());
  v.target_head =
      Eigen::MatrixXd::Zero(model.target_head.rows(), model.target_head.cols());
  v.target_bias = Eigen::VectorXd::Zero(model.target_bias.rows());
  v.source_head =
      Eigen::MatrixXd::Zero(model.source_head.rows(), model.source_head.cols());
  v.source_bias = Eigen::VectorXd::Zero(model.source_bias.rows());

  size_t per_epoch = schedule.epochs > 0
                         ? schedule.batches.size() / schedule.epochs
                         : schedule.batches.size();
  double last_epoch_loss = 0.0;
  size_t last_epoch_batches = 0;

  SurrogateGradients g;
  for (size_t bi = 0; bi < schedule.batches.size(); ++bi) {
    ResolvedBatch batch = resolve_batch(schedule.batches[bi], data);
    double loss = batch_loss_and_gradients(model, batch, hp.lambda_source, &g);
    if (!std::isfinite(loss))
      throw NumericError("training diverged: non-finite loss at batch " +
                         std::to_string(bi));

    auto step = [&](Eigen::MatrixXd& theta, Eigen::MatrixXd& vel,
                    const Eigen::MatrixXd& grad) {
      vel = hp.momentum * vel -
            hp.learning_rate * (grad + hp.weight_decay * theta);
      theta += vel;
    };
    auto step_v = [&](Eigen::VectorXd& theta, Eigen::VectorXd& vel,
                      const Eigen::VectorXd& grad) {
      vel = hp.momentum * vel -
            hp.learning_rate * (grad + hp.weight_decay * theta);
      theta += vel;
    };
    step(model.trunk, v.trunk, g.trunk);
    step(model.target_head, v.target_head, g.target_head);
    step_v(model.target_bias, v.target_bias, g.target_bias);
    step(model.source_head, v.source_head, g.source_head);
    step_v(model.source_bias, v.source_bias, g.source_bias);

    if (per_epoch == 0 || bi + per_epoch >= schedule.batches.size()) {
      last_epoch_loss += loss;
      ++last_epoch_batches;
    }
  }

  TrainMetrics metrics;
  metrics.batches = schedule.batches.size();
  metrics.final_loss =
      last_epoch_batches ? last_epoch_loss / static_cast<double>(last_epoch_batches)
                         : 0.0;
  return metrics;
}

std::vector<PredictionRecord> predict(const SurrogateModel& model, Domain head,
                                      const DescriptorTable& table,
                                      const std::vector<int>& labels) {
  const Eigen::MatrixXd& u =
      head == Domain::Target ? model.target_head : model.source_head;
  const Eigen::VectorXd& bias =
      head == Domain::Target ? model.target_bias : model.source_bias;
  if (labels.size() != table.size())
    throw InvalidArgumentError("label count does not match table size");

  std::vector<PredictionRecord> out;
  out.reserve(table.size());
  Eigen::VectorXd x(model.trunk.cols());
  for (size_t i = 0; i < table.size(); ++i) {
    const Descriptor& d = table.descriptors[i];
    if (static_cast<Eigen::Index>(d.hist.size()) != model.trunk.cols())
      throw InvalidArgumentError("descriptor dimension mismatch at sample " +
                                 std::to_string(i));
    for (size_t j = 0; j < d.hist.size(); ++j)
      x(static_cast<Eigen::Index>(j)) = d.hist[j];
    Eigen::VectorXd z = u * (model.trunk * x) + bias;
    double mx = z.maxCoeff();
    Eigen::VectorXd p = (z.array() - mx).exp();
    p /= p.sum();

    PredictionRecord rec;
    rec.target_index = static_cast<uint32_t>(i);
    rec.label = labels[i];
    rec.probabilities.assign(p.data(), p.data() + p.size());
    Eigen::Index argmax = 0;
    p.maxCoeff(&argmax);
    rec.predicted = static_cast<int>(argmax);
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

void write_block(BinaryWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      w.f32(static_cast<float>(m(r, c)));
}

void read_block(BinaryReader& r, Eigen::MatrixXd& m) {
  for (Eigen::Index row = 0; row < m.rows(); ++row)
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      double v = r.f32();
      if (!std::isfinite(v))
        throw ValidationError("non-finite model parameter");
      m(row, col) = v;
    }
}

}  // namespace

void save_model(const SurrogateModel& model,
                const std::filesystem::path& path) {
  atomic_write(path, [&](std::ostream& out) {
    BinaryWriter w(out);
    w.bytes("SJFM", 4);
    w.u32(kModelFormatVersion);
    w.u32(static_cast<uint32_t>(model.input_dim()));
    w.u32(static_cast<uint32_t>(model.feature_width()));
    w.u32(static_cast<uint32_t>(model.target_classes()));
    w.u32(static_cast<uint32_t>(model.source_classes()));
    write_block(w, model.trunk);
    write_block(w, model.target_head);
    write_block(w, model.target_bias);
    write_block(w, model.source_head);
    write_block(w, model.source_bias);
  });
}

SurrogateModel load_model(const std::filesystem::path& path) {
  BinaryReader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "SJFM", 4) != 0)
    throw ParseError("unrecognized model format: " + path.string());
  if (r.u32() != kModelFormatVersion)
    throw ParseError("model format version mismatch in " + path.string());
  uint32_t in = r.u32(), f = r.u32(), ct = r.u32(), cs = r.u32();
  if (!in || !f || ct < 2 || cs < 2 || in > (1u << 24) || f > (1u << 20))
    throw ParseError("implausible model dimensions in " + path.string());

  SurrogateModel m;
  m.trunk.resize(f, in);
  m.target_head.resize(ct, f);
  m.target_bias.resize(ct);
  m.source_head.resize(cs, f);
  m.source_bias.resize(cs);
  read_block(r, m.trunk);
  read_block(r, m.target_head);
  Eigen::MatrixXd tb(ct, 1), sb(cs, 1);
  read_block(r, tb);
  m.target_bias = tb.col(0);
  read_block(r, m.source_head);
  read_block(r, sb);
  m.source_bias = sb.col(0);
  return m;
}

TrainMetrics SurrogateTrainer::train(const BatchSchedule& schedule,
                                     const LoopData& data) {
  if (!model_) {
    size_t dim = 0;
    if (!data.targets->descriptors.empty())
      dim = data.targets->descriptors.front().hist.size();
    if (dim == 0) throw InvalidArgumentError("cannot infer input dimension");
    model_ = init_model(static_cast<int>(dim), hp_.feature_width,
                        data.target_classes, data.source_classes,
                        hp_.init_seed, hp_.init_scale);
  }
  TrainMetrics metrics = sievebank::train(*model_, schedule, data, hp_);
  auto preds = sievebank::predict(*model_, Domain::Target, *data.targets,
                                  data.target_labels);
  size_t correct = 0;
  for (const auto& p : preds) correct += p.predicted == p.label;
  metrics.train_accuracy =
      preds.empty() ? 0.0 : static_cast<double>(correct) / preds.size();
  return metrics;
}

std::vector<PredictionRecord> SurrogateTrainer::predict_targets(
    const LoopData& data) {
  if (!model_) throw InvalidArgumentError("predict before any training");
  return sievebank::predict(*model_, Domain::Target, *data.targets,
                            data.target_labels);
}

const SurrogateModel& SurrogateTrainer::model() const {
  if (!model_) throw InvalidArgumentError("no model trained yet");
  return *model_;
}

}  // namespace sievebank
