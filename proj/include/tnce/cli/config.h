#pragma once

#include <string>

#include "tnce/contrast/train.h"
#include "tnce/eval/experiments.h"
#include "tnce/mi/verify.h"
#include "tnce/sampleopt/search.h"
#include "tnce/synthdata/dataset.h"
#include "tnce/util/kv.h"

namespace tnce {

// Loaders from the flat key-value config into module configs. Every field
// has a default (documented in the README); unknown keys are rejected by the
// caller via require_all_consumed().

// data.kind selects the generator: latent_factor (explicit data.modality.<i>
// blocks), discrete_random, xor_triple, or the presets strong_weak,
// complementary, nuisance. data.path loads a saved dataset file instead.
MultiModalDataset dataset_from_config(KeyValueConfig& cfg);

// train.* / arch.* / optimizer.* / critic.* / proposal.alpha / policy.<i>.*
TrainSettings train_settings_from_config(KeyValueConfig& cfg,
                                         std::size_t num_modalities);

// verify.* plus the shared inner-training keys.
BoundVerifyConfig bound_config_from_config(KeyValueConfig& cfg);

// search.* plus inner-training and reward keys.
SearchSpec search_spec_from_config(KeyValueConfig& cfg,
                                   const MultiModalDataset& ds);

}  // namespace tnce
