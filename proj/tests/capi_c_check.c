/* Compile-only check that the public header is consumable from C. */
#include "ffattn.h"

const char* (*unused_version_fn)(void) = ffa_version;
ffa_status (*unused_train_fn)(const ffa_train_config*, ffa_epoch_fn, void*, ffa_result**) =
    ffa_train;

int ffa_header_is_c_compatible(void) {
  ffa_train_config cfg;
  ffa_train_config_init(&cfg);
  return cfg.batch_size == 100u && cfg.updates_per_epoch == 1000u && cfg.max_epochs == 100u &&
         cfg.test_size == 1000u && cfg.dim == 100u;
}
