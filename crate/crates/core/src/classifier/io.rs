use super::{build_classifier, ClassifierError, ClfCheckpoint, Stage, TrainConfig};
use crate::checkpoint::{CheckpointError, Container};
use crate::numcore::AdamState;

pub const CLF_MAGIC: [u8; 4] = *b"CLFC";

impl ClfCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut c = Container::default();
        let cfg = &self.config;
        c.set("stage", cfg.stage.name());
        c.set("learning_rate", cfg.learning_rate);
        c.set("epochs", cfg.epochs);
        c.set("batch_size", cfg.batch_size);
        c.set("seed", cfg.seed);
        c.set("lambda1", cfg.lambda1);
        c.set("lambda2", cfg.lambda2);
        c.set("epochs_completed", self.epochs_completed);
        c.set("batches_per_epoch", self.batches_per_epoch);
        for (i, p) in self.net.params.iter().enumerate() {
            c.push(format!("net.{i}.{}", p.name), p.value.shape(), p.value.data().to_vec());
        }
        c.put_adam("adam", &self.adam);
        c.push("loss_curve", &[self.loss_curve.len()], self.loss_curve.clone());
        c.encode(CLF_MAGIC)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ClassifierError> {
        let c = Container::decode(bytes, CLF_MAGIC)?;
        let stage = match c.get::<String>("stage")?.as_str() {
            "pretrain" => Stage::Pretrain,
            "finetune" => Stage::Finetune,
            other => return Err(CheckpointError::Config(format!("stage {other:?}")).into()),
        };
        let config = TrainConfig {
            stage,
            learning_rate: c.get("learning_rate")?,
            epochs: c.get("epochs")?,
            batch_size: c.get("batch_size")?,
            seed: c.get("seed")?,
            lambda1: c.get("lambda1")?,
            lambda2: c.get("lambda2")?,
        };
        let mut net = build_classifier::<f32>(0);
        for (i, p) in net.params.iter_mut().enumerate() {
            let name = format!("net.{i}.{}", p.name);
            let t = c.tensor(&name)?;
            if t.shape != p.value.shape() {
                return Err(CheckpointError::Shape {
                    name,
                    expected: p.value.shape().to_vec(),
                    found: t.shape.clone(),
                }
                .into());
            }
            p.value.data_mut().copy_from_slice(&t.data);
        }
        let refs: Vec<_> = net.params.iter().collect();
        let adam = c.load_adam("adam", &AdamState::new(&refs, 0.0, 0.0))?;
        let epochs_completed: usize = c.get("epochs_completed")?;
        let batches_per_epoch: usize = c.get("batches_per_epoch")?;
        let curve = c.tensor("loss_curve")?;
        if curve.data.len() != epochs_completed * batches_per_epoch {
            return Err(CheckpointError::Config(format!(
                "loss curve has {} entries for {epochs_completed} epochs of {batches_per_epoch} batches",
                curve.data.len()
            ))
            .into());
        }
        Ok(Self {
            net,
            adam,
            config,
            epochs_completed,
            batches_per_epoch,
            loss_curve: curve.data.clone(),
        })
    }
}
