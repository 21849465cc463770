#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bcdlog/model_config.hpp"

namespace bcdlog {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Learnable tensors of the tagger. Weight matrices follow the
// (out_features x in_features) convention. The convolution kernel is stored
// as (filters x kernel*embed) with the window position as the slow index, so a
// row-major (length x embed) activation reshapes directly into its windows.
// LSTM gates are stacked in the order input, forget, cell, output.
enum class Param : std::size_t {
  CharEmbed,
  Ln1Gamma,
  Ln1Beta,
  AttnInWeight,
  AttnInBias,
  AttnOutWeight,
  AttnOutBias,
  Ln2Gamma,
  Ln2Beta,
  MlpFcWeight,
  MlpFcBias,
  MlpProjWeight,
  MlpProjBias,
  ConvWeight,
  ConvBias,
  LstmFwdWih,
  LstmFwdWhh,
  LstmFwdBih,
  LstmFwdBhh,
  LstmBwdWih,
  LstmBwdWhh,
  LstmBwdBih,
  LstmBwdBhh,
  Ln3Gamma,
  Ln3Beta,
  EmitWeight,
  EmitBias,
  CrfTransitions,
  CrfStart,
  CrfEnd,
};
inline constexpr std::size_t kParamCount = static_cast<std::size_t>(Param::CrfEnd) + 1;

struct TensorShape {
  std::string_view name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return rows * cols; }
};

class ParameterLayout {
 public:
  ParameterLayout() = default;
  explicit ParameterLayout(const ModelConfig& config);

  const TensorShape& operator[](Param p) const { return shapes_[static_cast<std::size_t>(p)]; }
  std::span<const TensorShape> tensors() const noexcept { return shapes_; }
  std::size_t total() const noexcept { return total_; }

  friend bool operator==(const ParameterLayout& a, const ParameterLayout& b);

 private:
  std::array<TensorShape, kParamCount> shapes_{};
  std::size_t total_ = 0;
};

// All tensors live in one flat buffer; the optimizer and checkpoint code
// treat it as a single vector.
template <typename T>
class ParameterSet {
 public:
  using MatrixMap = Eigen::Map<Matrix<T>>;
  using ConstMatrixMap = Eigen::Map<const Matrix<T>>;
  using VectorMap = Eigen::Map<RowVector<T>>;
  using ConstVectorMap = Eigen::Map<const RowVector<T>>;

  ParameterSet() = default;
  // Zero-initialized.
  explicit ParameterSet(const ModelConfig& config)
      : layout_(config), values_(layout_.total(), T(0)) {}

  const ParameterLayout& layout() const noexcept { return layout_; }

  MatrixMap mat(Param p) {
    const auto& s = layout_[p];
    return MatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }
  ConstMatrixMap mat(Param p) const {
    const auto& s = layout_[p];
    return ConstMatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }
  VectorMap vec(Param p) {
    const auto& s = layout_[p];
    return VectorMap(values_.data() + s.offset, s.size());
  }
  ConstVectorMap vec(Param p) const {
    const auto& s = layout_[p];
    return ConstVectorMap(values_.data() + s.offset, s.size());
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  std::span<T> values(Param p) {
    const auto& s = layout_[p];
    return std::span<T>(values_).subspan(s.offset, s.size());
  }
  std::span<const T> values(Param p) const {
    const auto& s = layout_[p];
    return std::span<const T>(values_).subspan(s.offset, s.size());
  }

  std::size_t size() const noexcept { return values_.size(); }
  void set_zero() { std::fill(values_.begin(), values_.end(), T(0)); }

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    out.layout_ = layout_;
    out.values_.assign(values_.begin(), values_.end());
    return out;
  }

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.layout_ == b.layout_ && a.values_ == b.values_;
  }

 private:
  template <typename U>
  friend class ParameterSet;

  ParameterLayout layout_;
  std::vector<T> values_;
};

// PyTorch-style default initialization: N(0,1) embeddings, Xavier-uniform
// attention input projection, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for linear,
// convolution and LSTM weights, unit LayerNorm gains and U(-0.1, 0.1) CRF
// scores.
template <typename T>
ParameterSet<T> initialize_parameters(const ModelConfig& config, std::uint64_t seed);

bool all_finite(std::span<const float> values);

}  // namespace bcdlog
