#pragma once

#include <memory>

#include "shapebo/gp.hpp"
#include "shapebo/reduction.hpp"

namespace shapebo {

/// Common prediction surface over the plain and additive GP models.
class Surrogate {
public:
    virtual ~Surrogate() = default;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual Prediction predict(const Eigen::VectorXd& q) const = 0;
    virtual void gradient(const Eigen::VectorXd& q, Eigen::VectorXd& dmean,
                          Eigen::VectorXd& dsd) const = 0;
    [[nodiscard]] virtual double total_variance() const = 0;
};

class PlainGpSurrogate final : public Surrogate {
public:
    explicit PlainGpSurrogate(GpModel model) : model_(std::move(model)) {}
    [[nodiscard]] int dim() const override { return model_.p(); }
    [[nodiscard]] Prediction predict(const Eigen::VectorXd& q) const override {
        return shapebo::predict(model_, q);
    }
    void gradient(const Eigen::VectorXd& q, Eigen::VectorXd& dm, Eigen::VectorXd& ds) const override {
        predict_gradient(model_, q, dm, ds);
    }
    [[nodiscard]] double total_variance() const override { return model_.kernel.variance; }
    [[nodiscard]] const GpModel& model() const { return model_; }

private:
    GpModel model_;
};

class AdditiveGpSurrogate final : public Surrogate {
public:
    explicit AdditiveGpSurrogate(AdditiveGpModel model) : model_(std::move(model)) {}
    [[nodiscard]] int dim() const override { return model_.dim(); }
    [[nodiscard]] Prediction predict(const Eigen::VectorXd& q) const override {
        return predict_additive(model_, q);
    }
    void gradient(const Eigen::VectorXd& q, Eigen::VectorXd& dm, Eigen::VectorXd& ds) const override {
        predict_additive_gradient(model_, q, dm, ds);
    }
    [[nodiscard]] double total_variance() const override { return model_.total_variance(); }
    [[nodiscard]] const AdditiveGpModel& model() const { return model_; }

private:
    AdditiveGpModel model_;
};

} // namespace shapebo
