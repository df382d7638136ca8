"""Run the blow-up classifier over the 64 ground-truth pairs and print one row each."""
from heatcut import manifold as mf
from heatcut.acceptance import classifier_battery
from heatcut.cutanalysis import blowup_classifier


def main():
    print("index,model,kind,truth,verdict,exponent")
    for i, p in enumerate(classifier_battery()):
        rep = blowup_classifier(p.model, p.x, p.y)
        model = mf.model_to_dict(p.model)["model"]
        print(f"{i},{model},{p.kind},{'cut' if p.cut else 'non_cut'},{rep.verdict},{rep.exponent:.4f}")


if __name__ == "__main__":
    main()
