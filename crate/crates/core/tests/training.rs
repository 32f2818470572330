use sinkclust_core::episodes::{gen_attribute_dataset, Attribute, AttributeSpec, ConsistencyMode, EpisodeSampler, EpisodeShape};
use sinkclust_core::metrics::{eval_few_shot_clustering, ClusterConfig, Embedder};
use sinkclust_core::trainer::{train, EmbeddingModel, TrainConfig};

fn spec(signal: f64) -> AttributeSpec {
    AttributeSpec {
        attributes: vec![Attribute::new(5, signal); 3],
        noise_std: 1.0,
        dim_per_value: 2,
        samples_per_combination: 1,
        consistency: ConsistencyMode::Consistent { attribute: 0 },
    }
}

fn mean_fsc(model: &dyn Embedder, sampler: &EpisodeSampler, n: u64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let ep = sampler.sample(500, i);
            eval_few_shot_clustering(&ep, model, &ClusterConfig::default()).unwrap().clustering_accuracy.unwrap()
        })
        .collect()
}

#[test]
fn training_improves_clustering_accuracy() {
    let sp = spec(10.0);
    let train_ds = gen_attribute_dataset(&sp, 1).unwrap();
    let eval_ds = gen_attribute_dataset(&sp, 2).unwrap();
    let init = EmbeddingModel::new(&[sp.feature_dim(), 32, 8], 0).unwrap();
    let cfg = TrainConfig { epochs: 20, episodes_per_epoch: 100, ..Default::default() };
    let run = train(&train_ds, Some(&sp.consistency), init.clone(), &cfg, &mut ()).unwrap();
    assert!(run.is_complete());
    assert_eq!(run.episodes_done, 2000);

    let sampler = EpisodeSampler::new(&eval_ds, EpisodeShape::new(5, 5, 0), Some(&sp.consistency)).unwrap();
    let before = mean_fsc(&init, &sampler, 200);
    let after = mean_fsc(&run.model, &sampler, 200);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&after) >= mean(&before), "before {} after {}", mean(&before), mean(&after));
}

fn within_class_variance(model: &EmbeddingModel, sampler: &EpisodeSampler) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..100 {
        let ep = sampler.sample(900, i);
        let z = model.forward(&ep.support_x).unwrap();
        let protos = sinkclust_core::assign::prototypes(&z, &ep.support_y, ep.way()).unwrap();
        for (r, &y) in ep.support_y.iter().enumerate() {
            total += z.row(r).iter().zip(protos.row(y)).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            count += 1;
        }
    }
    total / count as f64
}

#[test]
fn center_loss_compacts_classes() {
    let sp = spec(3.0);
    let train_ds = gen_attribute_dataset(&sp, 3).unwrap();
    let held_out = gen_attribute_dataset(&sp, 4).unwrap();
    let init = EmbeddingModel::new(&[sp.feature_dim(), 32, 8], 5).unwrap();
    let base = TrainConfig { epochs: 5, episodes_per_epoch: 100, ..Default::default() };
    let mut without = base;
    without.loss.center_weight = 0.0;
    let with = train(&train_ds, Some(&sp.consistency), init.clone(), &base, &mut ()).unwrap();
    let without = train(&train_ds, Some(&sp.consistency), init, &without, &mut ()).unwrap();

    let sampler = EpisodeSampler::new(&held_out, EpisodeShape::new(5, 5, 0), Some(&sp.consistency)).unwrap();
    let (a, b) = (within_class_variance(&with.model, &sampler), within_class_variance(&without.model, &sampler));
    assert!(a < b, "lambda=1: {a}, lambda=0: {b}");
}
