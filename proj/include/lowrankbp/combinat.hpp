#ifndef LOWRANKBP_COMBINAT_HPP
#define LOWRANKBP_COMBINAT_HPP

#include "lowrankbp/combinat/dominance.hpp"
#include "lowrankbp/combinat/extremal.hpp"
#include "lowrankbp/combinat/finite_field.hpp"
#include "lowrankbp/combinat/matching.hpp"
#include "lowrankbp/combinat/packing.hpp"
#include "lowrankbp/combinat/set_family.hpp"

#endif  // LOWRANKBP_COMBINAT_HPP
