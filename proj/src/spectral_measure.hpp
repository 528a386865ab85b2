#pragma once

#include "mp_law.hpp"

namespace reprsize {

// Two-point (possibly signed) population measure: spike_weight on lambda, bulk_weight on 1.
struct PopulationMassSpec {
    double spike_weight;
    double bulk_weight;
    double lambda;
};

double spike_location(double lambda, double gamma_u);
double bbp_overlap(double lambda, double gamma_u);
bool above_bbp(double lambda, double gamma_u);

struct SampleMeasure {
    PopulationMassSpec pop;
    double gamma_u;
    mp::Support support;
    bool has_spike;        // false below BBP
    double spike_at;       // theta*; meaningful only when has_spike
    double spike_weight;   // 0 below BBP
    double zero_atom;

    double bulk_density(double theta) const;
    // Bulk density times dtheta/du in the sin^2 coordinate (smooth on [0, pi/2]).
    double bulk_density_in_u(double u) const;
    // Integral of the bulk density from lambda_- to theta.
    double bulk_mass_below(double theta) const;
    double total_bulk_mass() const;
};

SampleMeasure sample_measure(const PopulationMassSpec& pop, double gamma_u);

// Mass discarded when only eigen-directions above lambda_t are retained; alpha is the retained
// fraction belonging to lambda_t.
double measure_tail_mass(const SampleMeasure& meas, double lambda_t, double alpha);

}  // namespace reprsize
