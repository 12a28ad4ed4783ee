#ifndef NFPOS_CHECKPOINT_HPP
#define NFPOS_CHECKPOINT_HPP

#include <string>

#include "nfpos/model.hpp"

namespace nfpos {

// Checkpoint directory: `manifest` (model config, provenance, tensor index
// with CRC-32 per file) plus one NFPD float32 tensor file per named state
// tensor (parameters and batch-norm running statistics).

template <typename T>
void save_checkpoint(PosModel<T>& model, const std::string& dir, const KvFile& provenance);

// Model must be constructed with a matching ModelConfig; use
// peek_checkpoint_config to build it first.
template <typename T>
void load_checkpoint(PosModel<T>& model, const std::string& dir);

ModelConfig peek_checkpoint_config(const std::string& dir);
KvFile read_checkpoint_manifest(const std::string& dir);

}  // namespace nfpos

#endif
