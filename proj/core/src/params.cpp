#include "treecrf/params.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace treecrf {

namespace {

void check_pairing(std::span<const NamedParam> params,
                   std::span<const NamedParam> grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("sgd: parameter and gradient lists differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].value->rows() != grads[k].value->rows() ||
        params[k].value->cols() != grads[k].value->cols()) {
      throw std::invalid_argument("sgd: shape mismatch for " + params[k].name);
    }
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SgdOptimizer::SgdOptimizer(SgdOptions opts) : opts_(opts) {
  if (!(opts_.learning_rate > 0.0)) {
    throw std::invalid_argument("sgd: learning rate must be positive");
  }
  if (opts_.momentum < 0.0 || opts_.momentum >= 1.0) {
    throw std::invalid_argument("sgd: momentum must be in [0, 1)");
  }
  if (opts_.max_grad_norm < 0.0) {
    throw std::invalid_argument("sgd: max_grad_norm must be >= 0");
  }
}

void SgdOptimizer::step(std::span<const NamedParam> params,
                        std::span<const NamedParam> grads) {
  check_pairing(params, grads);
  if (velocity_.empty()) {
    for (const auto& p : params) {
      velocity_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    }
  }
  double scale = 1.0;
  if (opts_.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (const auto& g : grads) sq += g.value->squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > opts_.max_grad_norm) scale = opts_.max_grad_norm / norm;
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (opts_.momentum == 0.0) {
      *params[k].value -= opts_.learning_rate * scale * *grads[k].value;
      continue;
    }
    velocity_[k] = opts_.momentum * velocity_[k] + scale * *grads[k].value;
    *params[k].value -= opts_.learning_rate * velocity_[k];
  }
}

void sgd_step(std::span<const NamedParam> params,
              std::span<const NamedParam> grads, double learning_rate) {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("sgd: learning rate must be positive");
  }
  check_pairing(params, grads);
  for (std::size_t k = 0; k < params.size(); ++k) {
    *params[k].value -= learning_rate * *grads[k].value;
  }
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt,
                      std::span<const NamedParam> params) {
  out << "treecrf-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [key, value] : ckpt.meta) {
    out << "meta " << key << ' ' << value << '\n';
  }
  for (const auto& [name, entries] : ckpt.lists) {
    out << "list " << name << ' ' << entries.size() << '\n';
    for (const auto& e : entries) out << e << '\n';
  }
  for (const auto& p : params) {
    out << "param " << p.name << ' ' << p.shape.size();
    for (int d : p.shape) out << ' ' << d;
    out << '\n';
    const Mat& m = *p.value;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c > 0) out << ' ';
        out << format_double(m(r, c));
      }
      out << '\n';
    }
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("checkpoint: empty input");
  }
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "treecrf-checkpoint") {
      throw std::runtime_error("checkpoint: bad magic line");
    }
    if (version != kCheckpointVersion) {
      throw std::runtime_error("checkpoint: unsupported version " +
                               std::to_string(version));
    }
  }
  Checkpoint ckpt;
  while (std::getline(in, line)) {
    if (line == "end") return ckpt;
    std::istringstream ls(line);
    std::string kind, name;
    ls >> kind >> name;
    if (kind == "meta") {
      std::string value;
      std::getline(ls >> std::ws, value);
      ckpt.meta[name] = value;
    } else if (kind == "list") {
      std::size_t count = 0;
      ls >> count;
      auto& entries = ckpt.lists[name];
      for (std::size_t k = 0; k < count; ++k) {
        if (!std::getline(in, line)) {
          throw std::runtime_error("checkpoint: truncated list " + name);
        }
        entries.push_back(line);
      }
    } else if (kind == "param") {
      int rank = 0;
      ls >> rank;
      std::vector<int> shape(rank);
      std::size_t total = 1;
      for (int& d : shape) {
        ls >> d;
        total *= d;
      }
      if (!ls) throw std::runtime_error("checkpoint: bad param header " + name);
      std::vector<double> values(total);
      for (double& v : values) {
        if (!(in >> v)) {
          throw std::runtime_error("checkpoint: truncated values for " + name);
        }
      }
      in >> std::ws;
      ckpt.params[name] = {std::move(shape), std::move(values)};
    } else {
      throw std::runtime_error("checkpoint: unexpected line: " + line);
    }
  }
  throw std::runtime_error("checkpoint: missing end marker");
}

void load_params(const Checkpoint& ckpt, std::span<const NamedParam> params) {
  for (const auto& p : params) {
    auto it = ckpt.params.find(p.name);
    if (it == ckpt.params.end()) {
      throw std::runtime_error("checkpoint: missing parameter " + p.name);
    }
    if (it->second.first != p.shape) {
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
    }
    const auto& values = it->second.second;
    if (static_cast<Eigen::Index>(values.size()) != p.value->size()) {
      throw std::runtime_error("checkpoint: size mismatch for " + p.name);
    }
    *p.value = Eigen::Map<const Mat>(values.data(), p.value->rows(),
                                     p.value->cols());
  }
}

}  // namespace treecrf
