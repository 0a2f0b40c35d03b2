#pragma once

// Per-frame loop: detect with the previous filter, move and rescale the
// target, then train on a sample at the new state.

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "srdcf/box.hpp"
#include "srdcf/config.hpp"
#include "srdcf/detection.hpp"
#include "srdcf/features.hpp"
#include "srdcf/regularization.hpp"
#include "srdcf/solver.hpp"

namespace srdcf {

struct TargetState {
  double centerX = 0.0;
  double centerY = 0.0;
  double width = 0.0;
  double height = 0.0;
  double scale = 1.0;  // relative to the first-frame size

  [[nodiscard]] Box box() const { return Box::from_center(centerX, centerY, width, height); }
  bool operator==(const TargetState&) const = default;
};

class Tracker {
 public:
  /// Trains the first model on `frame` around `bbox`.
  static Tracker init(const Image& frame, const Box& bbox, const TrackerConfig& config) {
    config.validate();
    if (frame.empty()) throw InvalidInput("tracker init: empty frame");
    if (!(bbox.width > 0.0) || !(bbox.height > 0.0) || !std::isfinite(bbox.x) || !std::isfinite(bbox.y)) {
      throw InvalidInput("tracker init: bounding box must have positive area");
    }
    const double cx = bbox.center_x();
    const double cy = bbox.center_y();
    if (cx < 0.0 || cy < 0.0 || cx > frame.width || cy > frame.height) {
      throw InvalidInput("tracker init: bounding box centre lies outside the frame");
    }

    Tracker t;
    t.config_ = config;
    t.frameWidth_ = frame.width;
    t.frameHeight_ = frame.height;
    t.geom_ = make_geometry(bbox.width, bbox.height, config.sampleAreaFactor, config.cellSize,
                            config.maxGridSize);
    const double p = t.geom_.target_rows_cells();
    const double q = t.geom_.target_cols_cells();
    if (p < 1.0 || q < 1.0) {
      throw InvalidInput("tracker init: bounding box is smaller than one feature cell");
    }
    const GridDomain dom = t.geom_.domain();
    t.basis_ = std::make_shared<const RealSpectrumBasis>(partition_domain(dom));
    t.weights_ = config.regMode == RegMode::Srdcf
                     ? make_spatial_weights(dom, p, q, config.mu, config.eta, config.targetNnz)
                     : uniform_weights(dom, config.lambda);
    t.reg_ = build_operator(t.weights_.sparseSpectrum, *t.basis_, config.regJitter);
    t.label_ = gaussian_label(dom, p, q, config.labelSigmaFactor);
    t.labelReal_ = real_label(t.label_, *t.basis_);

    const FeatureMap x = extract_sample(frame, cx, cy, t.geom_, 1.0, t.extract_options());
    const DataOperator data = build_data_operator(x, t.basis_);
    t.model_ = init_model(data, t.labelReal_, make_normal_layout(t.basis_, t.reg_, x.depth()),
                          config.gamma);
    t.model_.fReal = initial_solve(data, t.labelReal_, t.reg_);
    gauss_seidel(t.model_, config.nGS);

    t.state_ = {cx, cy, bbox.width, bbox.height, 1.0};
    return t;
  }

  /// Tracks into the next frame. On error the tracker keeps its previous state.
  TargetState step(const Image& frame) {
    if (frame.width != frameWidth_ || frame.height != frameHeight_) {
      throw InvalidInput("tracker step: frame size differs from the first frame");
    }
    const Detection det = multi_scale_detect(frame, state_.centerX, state_.centerY, geom_,
                                             model_.fSpectra, detection_params());

    TargetState next = state_;
    next.scale = state_.scale * det.scaleFactor;
    next.width = geom_.targetWidth * next.scale;
    next.height = geom_.targetHeight * next.scale;
    // Keep the centre inside the frame, so at least a quarter of the box stays visible.
    next.centerX = std::clamp(state_.centerX + det.dx, 0.0, static_cast<double>(frameWidth_));
    next.centerY = std::clamp(state_.centerY + det.dy, 0.0, static_cast<double>(frameHeight_));

    SampleGeometry nextGeom = geom_;
    nextGeom.currentScale = next.scale;
    const FeatureMap x = extract_sample(frame, next.centerX, next.centerY, nextGeom, 1.0, extract_options());
    const DataOperator data = build_data_operator(x, basis_);

    update_model_in_place(model_, data, labelReal_);
    gauss_seidel(model_, config_.nGS);
    geom_ = nextGeom;
    state_ = next;
    lastDetection_ = det;
    return state_;
  }

  [[nodiscard]] const TargetState& state() const { return state_; }
  [[nodiscard]] const ModelState& model() const { return model_; }
  [[nodiscard]] ModelState& mutable_model() { return model_; }
  [[nodiscard]] const SampleGeometry& geometry() const { return geom_; }
  [[nodiscard]] const SpatialWeights& weights() const { return weights_; }
  [[nodiscard]] const RegularizationOperator& regularizer() const { return reg_; }
  [[nodiscard]] const TrackerConfig& config() const { return config_; }
  [[nodiscard]] const LabelMap& label() const { return label_; }
  [[nodiscard]] const Detection& last_detection() const { return lastDetection_; }

  [[nodiscard]] ExtractOptions extract_options() const {
    return {config_.featureKind, config_.grayMeanRemoval};
  }

  [[nodiscard]] DetectionParams detection_params() const {
    return {config_.numScales, config_.scaleStep, config_.nNe, extract_options()};
  }

  /// Runs detection with the current filter without changing any state.
  [[nodiscard]] Detection detect(const Image& frame) const {
    return multi_scale_detect(frame, state_.centerX, state_.centerY, geom_, model_.fSpectra,
                              detection_params());
  }

 private:
  Tracker() = default;

  TrackerConfig config_;
  int frameWidth_ = 0;
  int frameHeight_ = 0;
  SampleGeometry geom_;
  std::shared_ptr<const RealSpectrumBasis> basis_;
  SpatialWeights weights_;
  RegularizationOperator reg_;
  LabelMap label_;
  Eigen::VectorXd labelReal_;
  ModelState model_;
  TargetState state_;
  Detection lastDetection_;
};

}  // namespace srdcf
