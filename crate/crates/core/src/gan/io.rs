use std::fmt::Write as _;

use super::{build_gan, GanCheckpoint, GanConfig, GanError};
use crate::checkpoint::Container;
use crate::dataio::ClassId;
use crate::numcore::AdamState;

pub const GAN_MAGIC: [u8; 4] = *b"GANC";

impl GanCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut c = Container::default();
        let cfg = &self.config;
        c.set("latent_dim", cfg.latent_dim);
        c.set("epochs", cfg.epochs);
        c.set("batch_size", cfg.batch_size);
        c.set("learning_rate", cfg.learning_rate);
        c.set("beta1", cfg.beta1);
        c.set("leaky_alpha", cfg.leaky_alpha);
        c.set("seed", cfg.seed);
        c.set("class_id", cfg.class_id.index());
        c.set("epochs_completed", self.epochs_completed);
        c.set("batches_per_epoch", self.batches_per_epoch);
        c.put_network("generator", &self.generator.net);
        c.put_network("discriminator", &self.discriminator.net);
        c.put_adam("g_adam", &self.g_adam);
        c.put_adam("d_adam", &self.d_adam);
        let losses = self.loss_history.iter().flat_map(|&(d, g)| [d, g]).collect();
        c.push("loss_history", &[self.loss_history.len(), 2], losses);
        c.encode(GAN_MAGIC)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GanError> {
        let c = Container::decode(bytes, GAN_MAGIC)?;
        let class: usize = c.get("class_id")?;
        let config = GanConfig {
            latent_dim: c.get("latent_dim")?,
            epochs: c.get("epochs")?,
            batch_size: c.get("batch_size")?,
            learning_rate: c.get("learning_rate")?,
            beta1: c.get("beta1")?,
            leaky_alpha: c.get("leaky_alpha")?,
            seed: c.get("seed")?,
            class_id: ClassId::new(class)?,
        };
        config.validate()?;
        let (mut generator, mut discriminator) = build_gan(&config);
        c.load_network("generator", &mut generator.net)?;
        c.load_network("discriminator", &mut discriminator.net)?;
        let g_adam = c.load_adam("g_adam", &AdamState::new(&generator.net.parameters(), 0.0, 0.0))?;
        let d_adam = c.load_adam("d_adam", &AdamState::new(&discriminator.net.parameters(), 0.0, 0.0))?;
        let epochs_completed: usize = c.get("epochs_completed")?;
        let batches_per_epoch: usize = c.get("batches_per_epoch")?;
        let losses = c.tensor("loss_history")?;
        if losses.shape.len() != 2 || losses.shape[1] != 2 || losses.shape[0] != epochs_completed * batches_per_epoch {
            return Err(GanError::ResumeMismatch(format!(
                "loss history shape {:?} for {epochs_completed} epochs of {batches_per_epoch} batches",
                losses.shape
            )));
        }
        let loss_history = losses.data.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        Ok(Self {
            config,
            generator,
            discriminator,
            g_adam,
            d_adam,
            epochs_completed,
            batches_per_epoch,
            loss_history,
        })
    }
}

/// `epoch,batch,d_loss,g_loss` rows, one per recorded batch.
pub fn loss_history_csv(checkpoint: &GanCheckpoint) -> String {
    let mut s = String::from("epoch,batch,d_loss,g_loss\n");
    let per = checkpoint.batches_per_epoch.max(1);
    for (i, (d, g)) in checkpoint.loss_history.iter().enumerate() {
        writeln!(s, "{},{},{d},{g}", i / per, i % per).unwrap();
    }
    s
}
