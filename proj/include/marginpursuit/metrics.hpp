#pragma once
// Summaries of the empirical margin distribution and the 0-1 error.

#include "marginpursuit/dataset.hpp"
#include "marginpursuit/loss.hpp"

namespace marginpursuit {

struct MarginStats {
    double mean = 0.0;
    double variance = 0.0;  // population convention (1/n)
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double catoni_location = 0.0;  // Catoni estimate at the loss scale
};

// Quantiles are lower nearest-rank. Throws std::invalid_argument on empty data.
MarginStats margin_stats(const LinearModel& model, const Dataset& data, const ScaledLoss& loss);
MarginStats margin_stats(std::span<const double> margins, double s);

// Fraction of rows with y <w,x> <= 0; a zero score counts as an error.
// Throws std::invalid_argument on empty data.
double misclassification_error(const LinearModel& model, const Dataset& data);

}  // namespace marginpursuit
